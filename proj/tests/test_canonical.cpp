#include <doctest.h>

#include <string>
#include <vector>

#include "core/canonical.hpp"
#include "core/rng.hpp"

using namespace rwpattern;

TEST_CASE("path canonicalization collapses intermediate directories") {
  CHECK(canonicalize_path("C:\\Windows\\system32\\rsaenh.dll") == "c:..rsaenh.dll");
  CHECK(canonicalize_path("C:\\Users\\All Users\\blue.exe") == "c:..blue.exe");
  CHECK(canonicalize_path("a.dll") == "a.dll");
  CHECK(canonicalize_path("ADVAPI32.DLL") == "advapi32.dll");
  // root + final with no intermediate directory still wildcards
  CHECK(canonicalize_path("C:\\satan.exe") == "c:..satan.exe");
  CHECK(canonicalize_path("PIPE\\wkssvc") == "pipe..wkssvc");
  // forward slashes count as separators too (command lines with switches)
  CHECK(canonicalize_path("icacls . /grant Everyone:F /T /C /Q") == "icacls . ..q");
  CHECK(canonicalize_path("attrib +h .") == "attrib +h .");
  // trailing separators are harmless
  CHECK(canonicalize_path("C:\\Users\\emma\\") == "c:..emma");
}

TEST_CASE("path canonicalization properties") {
  // deterministic generator over a mix of roots, depths and name shapes
  const char* roots[] = {"C:", "D:", "PIPE", "%TMP%", "server"};
  const char* names[] = {"work", "A File", "x1.tmp", "LONG_name.docx", "s-1-5-21"};
  Rand rng(2024);
  for (int iter = 0; iter < 1000; ++iter) {
    std::string root = roots[rng.below(5)];
    std::string path = root;
    size_t depth = rng.below(5);
    for (size_t d = 0; d < depth; ++d)
      path += std::string(rng.below(2) ? "\\" : "/") + names[rng.below(5)];
    std::string leaf = std::string(names[rng.below(5)]) + std::to_string(rng.below(100));
    path += "\\" + leaf;

    std::string token = canonicalize_path(path);
    CAPTURE(path);
    // no separators survive
    CHECK(token.find('\\') == std::string::npos);
    CHECK(token.find('/') == std::string::npos);
    // idempotent
    CHECK(canonicalize_path(token) == token);
    // wildcard: different middle directories, same root and leaf, same token
    std::string rerouted = root + "\\something\\else\\" + leaf;
    CHECK(canonicalize_path(rerouted) == token);
  }
}

TEST_CASE("registry canonicalization keeps hive and tail") {
  auto t1 = canonicalize_regkey(
      "HKEY_LOCAL_MACHINE\\System\\CurrentControlSet\\Control\\NetworkProviderName");
  CHECK(t1.recognized_hive);
  CHECK(t1.token == "hkey_local_machine..networkprovidername");

  auto t2 = canonicalize_regkey("HKEY_USERS\\S-1-5-21-1966058-1343024091-1003\\Name", 2);
  CHECK(t2.recognized_hive);
  CHECK(t2.token == "hkey_users..s-1-5-21-1966058-1343024091-1003name");

  auto t3 = canonicalize_regkey("no-hive-string");
  CHECK_FALSE(t3.recognized_hive);
  CHECK(t3.token == "no-hive-string");

  // hive alone, forward slashes, and a hive-prefixed word that is not a hive
  CHECK(canonicalize_regkey("HKEY_USERS").token == "hkey_users");
  CHECK(canonicalize_regkey("HKEY_CURRENT_USER/Software/App").token == "hkey_current_user..app");
  CHECK_FALSE(canonicalize_regkey("HKEY_USERSXYZ\\Name").recognized_hive);
}
