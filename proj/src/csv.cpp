#include "origins/csv.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

#include "origins/error.hpp"

namespace origins::csv {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool blank_or_comment(const Row& row) {
  if (row.empty()) return true;
  if (row.size() == 1 && row[0].empty()) return true;
  return !row[0].empty() && row[0][0] == '#';
}

}  // namespace

std::vector<Row> parse(std::string_view text, char delimiter) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool was_quoted = false;

  auto end_field = [&] {
    row.push_back(was_quoted ? field : trim(field));
    field.clear();
    was_quoted = false;
  };
  auto end_row = [&] {
    end_field();
    if (!blank_or_comment(row)) rows.push_back(std::move(row));
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && trim(field).empty()) {
      field.clear();
      in_quotes = true;
      was_quoted = true;
    } else if (c == delimiter) {
      end_field();
    } else if (c == '\n') {
      end_row();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field");
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

std::string escape(std::string_view field, char delimiter) {
  if (field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string slug(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

Header::Header(const Row& header, const std::map<std::string, std::string>& aliases) {
  for (std::size_t i = 0; i < header.size(); ++i) positions_.emplace(lower(header[i]), i);
  for (const auto& [canonical, actual] : aliases) aliases_.emplace(lower(canonical), lower(actual));
}

std::optional<std::size_t> Header::find(const std::string& canonical) const {
  const std::string key = lower(canonical);
  if (auto a = aliases_.find(key); a != aliases_.end()) {
    if (auto p = positions_.find(a->second); p != positions_.end()) return p->second;
  }
  if (auto p = positions_.find(key); p != positions_.end()) return p->second;
  return std::nullopt;
}

std::size_t Header::require(const std::string& canonical) const {
  if (auto p = find(canonical)) return *p;
  throw ParseError("missing column: " + canonical);
}

double to_double(const std::string& field, const char* what, std::size_t row) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || field.empty()) {
    throw ParseError(std::string("unparsable number in ") + what + ": '" + field + "'", row);
  }
  if (!std::isfinite(v)) {
    throw ParseError(std::string("non-finite value in ") + what, row);
  }
  return v;
}

long long to_integer(const std::string& field, const char* what, std::size_t row) {
  long long v = 0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || field.empty()) {
    throw ParseError(std::string("unparsable integer in ") + what + ": '" + field + "'", row);
  }
  return v;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace origins::csv
