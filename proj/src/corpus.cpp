#include "apslda/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "apslda/error.hpp"
#include "apslda/rng.hpp"

namespace apslda {

namespace {

[[noreturn]] void parse_fail(const std::string& origin, size_t line_no, const std::string& what) {
  std::ostringstream oss;
  oss << origin << ":" << line_no << ": " << what;
  throw ParseError(oss.str());
}

bool parse_u64(std::string_view s, uint64_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

Corpus parse_libsvm(const std::string& text, uint32_t declared_vocab, const std::string& origin) {
  Corpus corpus;
  uint32_t max_word = 0;
  bool any_word = false;

  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line(text.data() + pos, (eol == std::string::npos ? text.size() : eol) - pos);
    pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    // Split on runs of spaces/tabs.
    std::vector<std::string_view> fields;
    size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
      if (i > start) fields.push_back(line.substr(start, i - start));
    }
    if (fields.empty()) continue;  // blank line, not a document

    // The label is required by the format but unused by the model.
    {
      const std::string_view label = fields[0];
      if (label.find(':') != std::string_view::npos)
        parse_fail(origin, line_no, "missing label field");
      char* end = nullptr;
      std::string buf(label);
      std::strtod(buf.c_str(), &end);
      if (end != buf.c_str() + buf.size()) parse_fail(origin, line_no, "bad label '" + buf + "'");
    }

    Document doc;
    doc.doc_id = static_cast<uint32_t>(corpus.docs.size());
    for (size_t f = 1; f < fields.size(); ++f) {
      const std::string_view pair = fields[f];
      const size_t colon = pair.find(':');
      if (colon == std::string_view::npos || colon == 0 || colon + 1 >= pair.size())
        parse_fail(origin, line_no, "bad feature '" + std::string(pair) + "'");
      uint64_t idx = 0, count = 0;
      if (!parse_u64(pair.substr(0, colon), idx) || !parse_u64(pair.substr(colon + 1), count))
        parse_fail(origin, line_no, "bad feature '" + std::string(pair) + "'");
      if (idx == 0) parse_fail(origin, line_no, "index must be >= 1");
      if (count == 0) parse_fail(origin, line_no, "count must be >= 1");
      if (idx > 0xFFFFFFFFull) parse_fail(origin, line_no, "index out of range");
      const uint32_t word = static_cast<uint32_t>(idx - 1);  // 1-based file, 0-based internal
      max_word = std::max(max_word, word);
      any_word = true;
      for (uint64_t c = 0; c < count; ++c) doc.tokens.push_back(word);
    }
    corpus.total_tokens += doc.tokens.size();
    corpus.docs.push_back(std::move(doc));
  }

  const uint32_t inferred = any_word ? max_word + 1 : 0;
  if (declared_vocab > 0 && declared_vocab < inferred) {
    std::ostringstream oss;
    oss << origin << ": declared vocabulary " << declared_vocab << " smaller than max word id "
        << max_word << " + 1";
    throw ArgError(oss.str());
  }
  corpus.vocab_size = std::max(declared_vocab, inferred);
  return corpus;
}

Corpus load_libsvm(const std::string& path, uint32_t declared_vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgError("cannot open dataset file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_libsvm(buf.str(), declared_vocab, path);
}

std::vector<Partition> partition(const Corpus& corpus, uint32_t workers) {
  if (workers < 1) throw ArgError("worker count must be >= 1");
  const uint32_t docs = static_cast<uint32_t>(corpus.docs.size());
  const uint32_t base = docs / workers;
  const uint32_t rem = docs % workers;
  std::vector<Partition> parts(workers);
  uint32_t next = 0;
  for (uint32_t w = 0; w < workers; ++w) {
    parts[w].worker_id = w;
    const uint32_t size = base + (w < rem ? 1 : 0);
    parts[w].doc_ids.reserve(size);
    for (uint32_t i = 0; i < size; ++i) parts[w].doc_ids.push_back(next++);
  }
  return parts;
}

InitialDeltas init_assignments(Corpus& corpus, uint32_t num_topics, uint64_t seed) {
  if (num_topics < 1) throw ArgError("topic count must be >= 1");
  Rng rng(derive_seed(seed, Stream::kInit));

  InitialDeltas deltas;
  deltas.topic.assign(num_topics, 0);
  std::map<std::pair<uint32_t, uint32_t>, int64_t> cells;
  for (Document& doc : corpus.docs) {
    doc.assignments.resize(doc.tokens.size());
    for (size_t i = 0; i < doc.tokens.size(); ++i) {
      const uint32_t z = rng.bounded(num_topics);
      doc.assignments[i] = z;
      ++cells[{doc.tokens[i], z}];
      ++deltas.topic[z];
    }
  }
  deltas.word_topic.reserve(cells.size());
  for (const auto& [cell, count] : cells)
    deltas.word_topic.push_back({cell.first, cell.second, count});
  return deltas;
}

}  // namespace apslda
