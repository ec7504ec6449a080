#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace origins::csv {

using Row = std::vector<std::string>;

// Splits delimited text into rows of trimmed fields. Double-quoted fields may
// contain the delimiter and doubled quotes. Blank lines and lines starting
// with '#' are skipped.
std::vector<Row> parse(std::string_view text, char delimiter = ',');

// Quotes a field if it contains the delimiter, a quote or a newline.
std::string escape(std::string_view field, char delimiter = ',');

std::string lower(std::string_view s);

// Lowercase alphanumerics only: "Off Map NE", "offmap_ne" and "off-map-ne"
// all become "offmapne".
std::string slug(std::string_view s);

// Maps canonical column names onto header positions. Header matching is
// case-insensitive; `aliases` renames canonical columns to the names used by
// a particular file (e.g. {"lon": "longitude"}).
class Header {
 public:
  Header(const Row& header, const std::map<std::string, std::string>& aliases = {});

  std::optional<std::size_t> find(const std::string& canonical) const;
  // Throws ParseError("missing column: <name>") when absent.
  std::size_t require(const std::string& canonical) const;

 private:
  std::map<std::string, std::size_t> positions_;
  std::map<std::string, std::string> aliases_;
};

// Strict numeric parsing of a whole field; throws ParseError naming `what`.
double to_double(const std::string& field, const char* what, std::size_t row);
long long to_integer(const std::string& field, const char* what, std::size_t row);

// Shortest representation that parses back to the same double.
std::string format_double(double v);

}  // namespace origins::csv
