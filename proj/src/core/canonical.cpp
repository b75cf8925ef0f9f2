#include "core/canonical.hpp"

#include <array>
#include <cctype>
#include <vector>

namespace rwpattern {

namespace {

bool is_sep(char c) { return c == '\\' || c == '/'; }

std::vector<std::string_view> split_components(std::string_view s) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_sep(s[i])) ++i;
    size_t start = i;
    while (i < s.size() && !is_sep(s[i])) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

constexpr std::array<std::string_view, 7> kHives = {
    "hkey_classes_root", "hkey_current_user",     "hkey_local_machine", "hkey_users",
    "hkey_current_config", "hkey_performance_data", "hkey_dyn_data",
};

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string canonicalize_path(std::string_view raw) {
  std::string lowered = to_lower(raw);
  auto parts = split_components(lowered);
  if (parts.empty()) return "";
  if (parts.size() == 1) return std::string(parts.front());
  return std::string(parts.front()) + ".." + std::string(parts.back());
}

RegkeyToken canonicalize_regkey(std::string_view raw, int tail_components) {
  std::string lowered = to_lower(raw);
  if (tail_components < 1) tail_components = 1;

  std::string_view hive;
  for (auto h : kHives) {
    if (lowered.size() >= h.size() && std::string_view(lowered).substr(0, h.size()) == h &&
        (lowered.size() == h.size() || is_sep(lowered[h.size()]))) {
      hive = h;
      break;
    }
  }
  if (hive.empty()) return {lowered, false};

  auto parts = split_components(std::string_view(lowered).substr(hive.size()));
  if (parts.empty()) return {std::string(hive), true};

  size_t first = parts.size() > static_cast<size_t>(tail_components)
                     ? parts.size() - static_cast<size_t>(tail_components)
                     : 0;
  std::string tail;
  for (size_t i = first; i < parts.size(); ++i) tail += std::string(parts[i]);
  return {std::string(hive) + ".." + tail, true};
}

}  // namespace rwpattern
