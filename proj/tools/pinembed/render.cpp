#include "render.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace pinembed::cli {

namespace {

using nlohmann::json;

void flatten(const json& v, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (v.is_object() && !v.empty()) {
    for (auto it = v.begin(); it != v.end(); ++it) {
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
  } else if (v.is_array() && !v.empty() && (v.front().is_object() || v.front().is_array())) {
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], prefix + "[" + std::to_string(i) + "]", out);
  } else {
    out.emplace_back(prefix, v.is_string() ? v.get<std::string>() : v.dump());
  }
}

}  // namespace

std::string render(const json& value, Format format) {
  if (format == Format::json) return value.dump(2) + "\n";
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(value, "", rows);
  std::size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  std::string out;
  for (const auto& [k, v] : rows) {
    out += k;
    out.append(width - k.size() + 2, ' ');
    out += v;
    out += '\n';
  }
  return out;
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace pinembed::cli
