#pragma once

#include <string>
#include <string_view>

namespace rwpattern {

std::string to_lower(std::string_view s);

/// Collapse a file path to `<root>..<final-component>`, lowercased. ".."
/// wildcards every intermediate directory so paths that differ only in the
/// middle map to one token. A bare name (no separator) passes through
/// lowercased, which also makes the function idempotent.
std::string canonicalize_path(std::string_view raw);

struct RegkeyToken {
  std::string token;
  bool recognized_hive = false;
};

/// Collapse a registry path to `<hive>..<tail>` where tail concatenates the
/// last `tail_components` path components with separators removed. When no
/// known hive prefixes the key, the lowercased input is returned verbatim
/// with recognized_hive == false.
RegkeyToken canonicalize_regkey(std::string_view raw, int tail_components = 1);

}  // namespace rwpattern
