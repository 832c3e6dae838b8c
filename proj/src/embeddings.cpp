#include "emodist/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "emodist/error.hpp"
#include "emodist/io.hpp"

namespace emodist {
namespace {

// Splits on runs of spaces/tabs.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

bool EmbeddingTable::set(std::string_view word, std::span<const float> values) {
  if (values.size() != dim_) {
    throw std::invalid_argument("vector for '" + std::string(word) + "' has " + std::to_string(values.size()) +
                                " values, table dimension is " + std::to_string(dim_));
  }
  std::string key(word);
  const auto it = index_.find(key);
  if (it != index_.end()) {
    std::copy(values.begin(), values.end(), mutable_vector(it->second).begin());
    return true;
  }
  index_.emplace(key, words_.size());
  words_.push_back(std::move(key));
  data_.insert(data_.end(), values.begin(), values.end());
  return false;
}

std::optional<std::size_t> EmbeddingTable::index_of(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::span<const float>> EmbeddingTable::find(std::string_view word) const {
  const auto i = index_of(word);
  if (!i) return std::nullopt;
  return vector(*i);
}

EmbeddingTable parse_vectors(std::string_view text, std::vector<std::string>* warnings) {
  auto warn = [&](std::string msg) {
    if (warnings != nullptr) warnings->push_back(std::move(msg));
  };

  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  if (!next_line(line)) throw DataError("vector file is empty");
  const auto header = split_fields(line);
  std::size_t declared = 0;
  std::size_t dim = 0;
  if (header.size() != 2 || !parse_number(header[0], declared) || !parse_number(header[1], dim) || dim == 0) {
    throw RecordError(1, "expected header '<count> <dim>'");
  }

  EmbeddingTable table(dim);
  std::vector<float> values(dim);
  std::size_t rows = 0;
  while (next_line(line)) {
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != dim + 1) {
      throw RecordError(line_no, "expected " + std::to_string(dim) + " values, got " +
                                     std::to_string(fields.size() - 1));
    }
    for (std::size_t k = 0; k < dim; ++k) {
      if (!parse_number(fields[k + 1], values[k]) || !std::isfinite(values[k])) {
        throw RecordError(line_no, "unparseable value '" + std::string(fields[k + 1]) + "'");
      }
    }
    if (table.set(fields[0], values)) {
      warn("line " + std::to_string(line_no) + ": duplicate word '" + std::string(fields[0]) + "', keeping last");
    }
    ++rows;
  }
  if (rows != declared) {
    warn("header declares " + std::to_string(declared) + " words, file has " + std::to_string(rows));
  }
  return table;
}

EmbeddingTable load_vectors(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  return parse_vectors(read_file(path), warnings);
}

std::string write_vectors(const EmbeddingTable& table) {
  std::string out = std::to_string(table.size()) + " " + std::to_string(table.dim()) + "\n";
  char buf[32];
  for (std::size_t i = 0; i < table.size(); ++i) {
    out += table.word(i);
    for (float v : table.vector(i)) {
      const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      (void)ec;
      out += ' ';
      out.append(buf, end);
    }
    out += '\n';
  }
  return out;
}

double cosine(std::span<const float> a, std::span<const float> b) noexcept {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) {
    dot += static_cast<double>(a[k]) * b[k];
    na += static_cast<double>(a[k]) * a[k];
    nb += static_cast<double>(b[k]) * b[k];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

}  // namespace emodist
