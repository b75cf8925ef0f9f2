#include "core/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "core/errors.hpp"
#include "core/feature.hpp"

namespace rwpattern {

namespace {

using P = std::pair<std::string, std::string>;

RawEvent file_event(std::string verb, std::string object, std::string path) {
  return RawEvent::enhanced(std::move(verb), std::move(object), {P{"file", std::move(path)}});
}

RawEvent regkey_read(std::string key) {
  return RawEvent::enhanced("read", "registry", {P{"regkey", std::move(key)}});
}

// Families are interleaved round-robin so the high-frequency head of the
// Zipf draw spans libraries, documents, registry and browsing activity alike.
std::vector<RawEvent> build_catalog() {
  std::vector<std::vector<RawEvent>> families;

  const char* dlls[] = {
      "kernel32.dll", "ntdll.dll",    "user32.dll",   "gdi32.dll",    "shell32.dll",
      "msvcrt.dll",   "ws2_32.dll",   "wininet.dll",  "shlwapi.dll",  "comctl32.dll",
      "comdlg32.dll", "oleaut32.dll", "version.dll",  "psapi.dll",    "imm32.dll",
      "setupapi.dll", "secur32.dll",  "netapi32.dll", "dnsapi.dll",   "iphlpapi.dll",
      "crypt32.dll",  "wintrust.dll", "msimg32.dll",  "uxtheme.dll",  "winspool.drv",
  };
  std::vector<RawEvent> loads;
  for (const char* dll : dlls) loads.push_back(file_event("load", "library", dll));
  families.push_back(std::move(loads));

  std::vector<RawEvent> docs;
  for (int i = 0; i < 120; ++i) {
    std::string path = "C:\\Users\\emma\\Documents\\report_" + std::to_string(i) + ".docx";
    docs.push_back(file_event("read", "file", path));
    docs.push_back(file_event("write", "file", path));
  }
  families.push_back(std::move(docs));

  std::vector<RawEvent> exes;
  for (int i = 0; i < 40; ++i) {
    std::string path = "C:\\Users\\emma\\Downloads\\setup_" + std::to_string(i) + ".exe";
    exes.push_back(file_event("read", "file", path));
    exes.push_back(file_event("write", "file", path));
    exes.push_back(file_event("execute", "file", path));
  }
  families.push_back(std::move(exes));

  std::vector<RawEvent> temp;
  for (int i = 0; i < 60; ++i)
    temp.push_back(file_event(
        "delete", "file", "C:\\Users\\emma\\AppData\\Local\\Temp\\work_" + std::to_string(i) + ".log"));
  families.push_back(std::move(temp));

  std::vector<RawEvent> cache;
  for (int i = 0; i < 150; ++i)
    cache.push_back(file_event("read", "file",
                               "C:\\Users\\emma\\AppData\\Local\\Microsoft\\Windows\\INetCache\\page_" +
                                   std::to_string(i) + ".htm"));
  cache.push_back(file_event("write", "file",
                             "C:\\Users\\emma\\AppData\\Local\\Microsoft\\Windows\\History\\history.dat"));
  families.push_back(std::move(cache));

  std::vector<RawEvent> regs;
  for (int i = 0; i < 80; ++i)
    regs.push_back(regkey_read("HKEY_CURRENT_USER\\Software\\WebBrowser\\pref_" + std::to_string(i)));
  for (int i = 0; i < 40; ++i)
    regs.push_back(regkey_read("HKEY_LOCAL_MACHINE\\Software\\OS\\setting_" + std::to_string(i)));
  families.push_back(std::move(regs));

  std::vector<RawEvent> media;
  for (int i = 0; i < 30; ++i)
    media.push_back(
        file_event("read", "file", "C:\\Users\\emma\\Music\\track_" + std::to_string(i) + ".mp3"));
  families.push_back(std::move(media));

  std::vector<RawEvent> dirs;
  for (int i = 0; i < 30; ++i)
    dirs.push_back(
        file_event("create", "dir", "C:\\Users\\emma\\Projects\\proj_" + std::to_string(i)));
  families.push_back(std::move(dirs));

  std::vector<RawEvent> apis;
  const char* file_apis[] = {"ntcreatefile", "ntreadfile", "ntwritefile", "ntclose"};
  for (const char* api : file_apis)
    for (const char* flags : {"1", "2", "4"})
      apis.push_back(RawEvent::api(api, "file", {"h", flags}));
  families.push_back(std::move(apis));

  std::vector<RawEvent> catalog;
  for (size_t round = 0;; ++round) {
    bool emitted = false;
    for (auto& family : families) {
      if (round < family.size()) {
        catalog.push_back(family[round]);
        emitted = true;
      }
    }
    if (!emitted) break;
  }
  return catalog;
}

std::vector<PatternSpec> build_fixtures() {
  std::vector<PatternSpec> fixtures;

  {
    PatternSpec p;
    p.name = "wannacry-like";
    p.planted_events = {
        file_event("load", "library", "advapi32.dll"),
        file_event("write", "file", "C:\\Intel\\qeriuwjhrf\\t.wnry"),
        file_event("write", "file", "C:\\Intel\\qeriuwjhrf\\u.wnry"),
        file_event("write", "file", "C:\\Intel\\qeriuwjhrf\\r.wnry"),
        RawEvent::api("RegCreateKeyExW", "registry", {"Software\\\\WanaCrypt0r", "33554432"}),
        file_event("execute", "file", "attrib +h ."),
        file_event("execute", "file", "icacls . /grant Everyone:F /T /C /Q"),
        file_event("write", "file", "C:\\Intel\\qeriuwjhrf\\00000000.pky"),
        file_event("write", "file", "C:\\Intel\\qeriuwjhrf\\00000000.eky"),
        file_event("write", "file", "C:\\Intel\\qeriuwjhrf\\taskdl.exe"),
        file_event("write", "file", "C:\\Intel\\qeriuwjhrf\\taskse.exe"),
    };
    fixtures.push_back(std::move(p));
  }
  {
    PatternSpec p;
    p.name = "dbger-like";
    p.planted_events = {
        file_event("create", "dir", "C:\\Users"),
        file_event("create", "dir", "C:\\Users\\AllUsers"),
        file_event("write", "file", "C:\\Users\\AllUsers\\blue.exe"),
        file_event("write", "file", "C:\\Users\\AllUsers\\star.exe"),
        file_event("write", "file", "C:\\Users\\AllUsers\\down64.dll"),
        file_event("write", "file", "C:\\satan.exe"),
        file_event("execute", "file", "C:\\satan.exe"),
        file_event("write", "file", "C:\\Users\\AllUsers\\mmkt.exe"),
        file_event("execute", "file", "C:\\Users\\AllUsers\\mmkt.exe"),
        file_event("write", "file", "C:\\Windows\\Temp\\KSession"),
    };
    fixtures.push_back(std::move(p));
  }
  {
    PatternSpec p;
    p.name = "defray-like";
    p.planted_events = {
        file_event("load", "library", "ole32.dll"),
        file_event("load", "library", "explorer.exe"),
        file_event("execute", "file", "C:\\ShellCmd\\-hibernate-timeout-dc0"),
        file_event("write", "file", "C:\\Users\\emma\\AppData\\Local\\Temp\\explorer.exe"),
        file_event("execute", "file", "C:\\Users\\emma\\AppData\\Local\\Temp\\explorer.exe"),
        file_event("write", "file", "C:\\Users\\emma\\AppData\\Local\\Temp\\taskmgr.exe"),
        file_event("execute", "file", "C:\\Users\\emma\\AppData\\Local\\Temp\\taskmgr.exe"),
        file_event("execute", "file", "vssadmin delete shadows /all /quiet"),
        file_event("execute", "file", "bcdedit /set {default} recoveryenabled no"),
        file_event("write", "file", "C:\\Users\\emma\\Desktop\\files.txt"),
    };
    fixtures.push_back(std::move(p));
  }
  {
    PatternSpec p;
    p.name = "locky-like";
    p.planted_events = {
        file_event("write", "file", "PIPE\\wkssvc"),
        file_event("read", "file", "PIPE\\wkssvc"),
        file_event("write", "file", "PIPE\\lsarpc"),
        file_event("read", "file", "PIPE\\lsarpc"),
        regkey_read("HKEY_LOCAL_MACHINE\\System\\CurrentControlSet\\Control\\NetworkProviderName"),
        regkey_read("HKEY_LOCAL_MACHINE\\System\\CurrentControlSet\\SystWorkProviderProviderPath"),
        regkey_read("HKEY_LOCAL_MACHINE\\System\\CurrentControlSet\\Control\\ProviderOrder"),
        file_event("load", "library", "C:\\Windows\\system32\\ntlanman.dll"),
        file_event("read", "file", "PIPE\\ntsvcs"),
        regkey_read("HKEY_USERS\\S-1-5-21-1966058-1343024091-1003Name"),
    };
    fixtures.push_back(std::move(p));
  }
  {
    PatternSpec p;
    p.name = "cerber-like";
    p.planted_events = {
        file_event("create", "dir", "C:\\Users\\emma\\AppData\\Roaming\\b51826f3"),
        file_event("write", "file", "C:\\Users\\emma\\AppData\\Roaming\\b51826f3\\4e89.tmp"),
        file_event("write", "file", "C:\\Users\\emma\\AppData\\Roaming\\b51826f3\\5572.tmp"),
        regkey_read("HKEY_LOCAL_MACHINE\\ProfileList\\SoftIleListProfilesDirectory"),
        regkey_read("HKEY_LOCAL_MACHINE\\ProfileList\\SoftLeListDefaultUserProfile"),
        regkey_read("HKEY_LOCAL_MACHINE\\ProfileList\\SoftS-1-5-18ProfileImagePath"),
        regkey_read("HKEY_LOCAL_MACHINE\\ProfileList\\Soft091-1003ProfileImagePath"),
        regkey_read("HKEY_LOCAL_MACHINE\\Cryptography\\SoftAphic ProviderImage Path"),
        file_event("read", "file", "C:\\Windows\\system32\\rsaenh.dll"),
        file_event("load", "file", "C:\\Windows\\system32\\rsaenh.dll"),
        regkey_read("HKEY_LOCAL_MACHINE\\CryptographyMachineGuid"),
    };
    fixtures.push_back(std::move(p));
  }
  {
    PatternSpec p;
    p.name = "gandcrab-like";
    p.planted_events = {
        regkey_read("HKEY_LOCAL_MACHINE\\SystComputerNameComputerName"),
        regkey_read("HKEY_LOCAL_MACHINE\\SessionManagerName"),
        regkey_read("HKEY_LOCAL_MACHINE\\ParametersDomain"),
        regkey_read("HKEY_LOCAL_MACHINE\\0ProcessorNameString"),
        regkey_read("HKEY_LOCAL_MACHINE\\0Identifier"),
        regkey_read("HKEY_LOCAL_MACHINE\\SystGerSafeProcessSearchMode"),
        regkey_read("HKEY_LOCAL_MACHINE\\0VendorIdentifier"),
        file_event("write", "file", "C:\\Users\\emma\\AppData\\Roaming\\Microsoft\\lrcjty.exe"),
        file_event("execute", "file", "C:\\Users\\emma\\AppData\\Roaming\\Microsoft\\lrcjty.exe"),
        RawEvent::enhanced("write", "registry",
                           {P{"content", "..x00"}, P{"object", "none"},
                            P{"regkey", "HKEY_CURRENT_USER\\RunOnceOopmhnLocoz"}}),
    };
    fixtures.push_back(std::move(p));
  }
  {
    PatternSpec p;
    p.name = "nransom-like";
    p.planted_events = {
        file_event("create", "dir", "C:\\Users\\emma\\AppData\\Local\\Temp\\1.tmp\\Tools"),
        file_event("write", "file", "C:\\Users\\emma\\AppData\\Local\\Temp\\1.tmp\\nransom.exe"),
        file_event("write", "file", "C:\\Users\\emma\\AppData\\Local\\Temp\\1.tmp\\Interop.WMPLib.dll"),
        file_event("write", "file",
                   "C:\\Users\\emma\\AppData\\Local\\Temp\\1.tmp\\AxInterop.WMPLib.dll"),
        file_event("write", "file",
                   "C:\\Users\\emma\\AppData\\Local\\Temp\\1.tmp\\Tools\\your-mom-gay.mp3"),
        file_event("execute", "file", "nransom.exe"),
        file_event("execute", "file", "C:\\Windows\\system32\\cmd"),
        file_event("read", "file",
                   "C:\\Users\\emma\\AppData\\Local\\Temp\\1.tmp\\Tools\\your-mom-gay.mp3"),
        file_event("delete", "file",
                   "C:\\Users\\emma\\AppData\\Local\\Temp\\1.tmp\\Tools\\your-mom-gay.mp3"),
        file_event("delete", "dir", "C:\\Users\\emma\\AppData\\Local\\Temp\\1.tmp"),
    };
    fixtures.push_back(std::move(p));
  }
  return fixtures;
}

// Zipf(0.8) cumulative weights over the first n catalog entries.
const std::vector<double>& zipf_cumulative(size_t n) {
  static const std::vector<double> full = [] {
    std::vector<double> cum(ambient_catalog().size());
    double acc = 0.0;
    for (size_t i = 0; i < cum.size(); ++i) {
      acc += 1.0 / std::pow(static_cast<double>(i + 1), 0.8);
      cum[i] = acc;
    }
    return cum;
  }();
  static const std::vector<double> common(full.begin(),
                                          full.begin() + static_cast<long>(ambient_common_pool_size()));
  return n == full.size() ? full : common;
}

size_t draw_catalog_index(Rand& rng, bool common_only) {
  const auto& cum = zipf_cumulative(common_only ? ambient_common_pool_size()
                                                : ambient_catalog().size());
  double u = rng.unit() * cum.back();
  auto it = std::upper_bound(cum.begin(), cum.end(), u);
  size_t idx = static_cast<size_t>(it - cum.begin());
  return std::min(idx, cum.size() - 1);
}

}  // namespace

const std::vector<RawEvent>& ambient_catalog() {
  static const std::vector<RawEvent> catalog = build_catalog();
  return catalog;
}

size_t ambient_common_pool_size() { return 200; }

const std::vector<PatternSpec>& builtin_fixtures() {
  static const std::vector<PatternSpec> fixtures = build_fixtures();
  return fixtures;
}

const PatternSpec* find_fixture(std::string_view name) {
  for (const auto& f : builtin_fixtures())
    if (f.name == name) return &f;
  return nullptr;
}

std::vector<std::string> planted_feature_keys(const PatternSpec& pattern) {
  std::vector<std::string> keys;
  keys.reserve(pattern.planted_events.size());
  for (const auto& raw : pattern.planted_events)
    keys.push_back(make_feature_key(canonicalize_raw(raw)));
  return keys;
}

std::vector<RawEvent> gen_normal_stream(uint64_t seed, size_t n_events, bool common_only) {
  Rand rng(seed);
  std::vector<RawEvent> events;
  events.reserve(n_events);
  for (size_t i = 0; i < n_events; ++i)
    events.push_back(ambient_catalog()[draw_catalog_index(rng, common_only)]);
  return events;
}

InfectedStream gen_infected(uint64_t seed, std::vector<RawEvent> base, const PatternSpec& pattern,
                            double injection_rate) {
  InfectedStream out;
  size_t n_planted = injection_rate > 0.0
                         ? static_cast<size_t>(std::llround(static_cast<double>(base.size()) *
                                                            injection_rate / 100.0))
                         : 0;
  if (n_planted == 0 || pattern.planted_events.empty()) {
    out.events = std::move(base);
    return out;
  }

  Rand rng(seed);
  size_t merged = base.size() + n_planted;
  std::vector<size_t> slots(merged);
  for (size_t i = 0; i < merged; ++i) slots[i] = i;
  rng.partial_shuffle(slots, n_planted);
  slots.resize(n_planted);
  std::sort(slots.begin(), slots.end());

  out.events.reserve(merged);
  out.planted_positions = slots;
  size_t base_pos = 0, slot_pos = 0;
  for (size_t i = 0; i < merged; ++i) {
    if (slot_pos < slots.size() && slots[slot_pos] == i) {
      out.events.push_back(pattern.planted_events[slot_pos % pattern.planted_events.size()]);
      ++slot_pos;
    } else {
      out.events.push_back(std::move(base[base_pos++]));
    }
  }
  return out;
}

void write_corpus(const std::string& out_dir, const PatternSpec* fixture, const SynthOptions& opts) {
  if (opts.n_normal < 1) fail(Errc::invalid_argument, "n_normal must be >= 1");
  if (opts.events_per_doc < 1) fail(Errc::invalid_argument, "events_per_doc must be >= 1");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(Errc::io, "cannot create directory " + out_dir + ": " + ec.message());

  const char* ext = opts.stream_format ? ".events" : ".json";
  auto encode = [&](const std::vector<RawEvent>& raw) {
    if (!opts.stream_format) return report_to_json(raw);
    std::vector<EventRecord> canon;
    canon.reserve(raw.size());
    for (const auto& ev : raw) canon.push_back(canonicalize_raw(ev));
    return events_to_stream(canon);
  };

  for (size_t i = 0; i < opts.n_normal; ++i) {
    auto events = gen_normal_stream(normal_doc_seed(opts.seed, i), opts.events_per_doc);
    if (fixture && opts.confuser_fraction > 0.0) {
      Rand rng(confuser_seed(opts.seed, i));
      if (rng.unit() < opts.confuser_fraction) {
        size_t which = static_cast<size_t>(rng.below(fixture->planted_events.size()));
        size_t where = static_cast<size_t>(rng.below(events.size() + 1));
        events.insert(events.begin() + static_cast<long>(where), fixture->planted_events[which]);
      }
    }
    char name[64];
    std::snprintf(name, sizeof name, "normal_%03zu%s", i, ext);
    write_file(out_dir + "/" + name, encode(events));
  }

  if (!fixture) return;
  for (size_t j = 0; j < opts.n_infected; ++j) {
    uint64_t stream_seed = infected_stream_seed(opts.seed, j);
    auto base = gen_normal_stream(stream_seed, opts.events_per_doc, /*common_only=*/true);
    auto infected = gen_infected(derive_seed(stream_seed, 1), std::move(base), *fixture,
                                 opts.injection_rate);
    char name[64];
    std::snprintf(name, sizeof name, "infected_%03zu%s", j, ext);
    write_file(out_dir + "/" + name, encode(infected.events));

    std::ostringstream truth;
    for (size_t pos : infected.planted_positions) truth << pos << "\n";
    write_file(out_dir + "/" + name + ".truth", truth.str());
  }
}

}  // namespace rwpattern
