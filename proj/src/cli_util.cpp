#include "smectic/cli_util.hpp"

#include <atomic>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace smectic {

namespace fs = std::filesystem;

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw std::runtime_error("read failed: " + path);
  return std::move(buf).str();
}

void atomic_write_file(const std::string& path, const std::string& bytes) {
  static std::atomic<unsigned> counter{0};
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec)
      throw std::runtime_error("cannot create directory " +
                               target.parent_path().string() + ": " +
                               ec.message());
  }
  const std::string tmp = path + ".tmp-" +
                          std::to_string(counter.fetch_add(1)) + "-" +
                          std::to_string(static_cast<unsigned>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::remove(tmp.c_str());
      throw std::runtime_error("write failed: " + tmp);
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw std::runtime_error("rename " + tmp + " -> " + path + " failed: " +
                             ec.message());
  }
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(out, 16);
}

// ---------------------------------------------------------------------------
// TOML subset

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key_chars(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
      return false;
  return true;
}

[[noreturn]] void parse_fail(const std::string& origin, int line,
                             const std::string& msg) {
  throw std::invalid_argument(origin + ":" + std::to_string(line) + ": " +
                              msg);
}

// Strips a trailing comment that starts outside any quoted string.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_string) {
      if (c == '\\') {
        ++i;  // skip the escaped character
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string unescape_string(const std::string& origin, int line_no,
                            const std::string& body) {
  std::string out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (c != '\\') {
      out.push_back(c);
      continue;
    }
    if (i + 1 >= body.size())
      parse_fail(origin, line_no, "dangling escape in string");
    const char e = body[++i];
    switch (e) {
      case '"': out.push_back('"'); break;
      case '\\': out.push_back('\\'); break;
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      default:
        parse_fail(origin, line_no,
                   std::string("unsupported escape '\\") + e + "' in string");
    }
  }
  return out;
}

bool looks_like_integer(const std::string& v) {
  std::size_t i = (v[0] == '+' || v[0] == '-') ? 1 : 0;
  if (i >= v.size()) return false;
  for (; i < v.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(v[i]))) return false;
  return true;
}

}  // namespace

TomlTable TomlTable::parse_string(const std::string& text,
                                  const std::string& origin) {
  TomlTable t;
  t.origin_ = origin;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        parse_fail(origin, line_no, "unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (!valid_key_chars(name))
        parse_fail(origin, line_no, "invalid section name '" + name + "'");
      section = name;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      parse_fail(origin, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!valid_key_chars(key))
      parse_fail(origin, line_no, "invalid key '" + key + "'");
    if (val.empty()) parse_fail(origin, line_no, "missing value");
    const std::string dotted = section.empty() ? key : section + "." + key;
    if (t.values_.count(dotted))
      parse_fail(origin, line_no, "duplicate key '" + dotted + "'");

    Value v;
    if (val.front() == '"') {
      if (val.size() < 2 || val.back() != '"')
        parse_fail(origin, line_no, "unterminated string");
      v.kind = Kind::string;
      v.text = unescape_string(origin, line_no, val.substr(1, val.size() - 2));
    } else if (val == "true" || val == "false") {
      v.kind = Kind::boolean;
      v.b = (val == "true");
    } else if (looks_like_integer(val)) {
      v.kind = Kind::integer;
      errno = 0;
      char* end = nullptr;
      v.i = std::strtoll(val.c_str(), &end, 10);
      if (errno == ERANGE || end != val.c_str() + val.size())
        parse_fail(origin, line_no, "integer out of range: " + val);
      v.d = static_cast<double>(v.i);
    } else {
      char* end = nullptr;
      errno = 0;
      v.d = std::strtod(val.c_str(), &end);
      if (end != val.c_str() + val.size() || errno == ERANGE)
        parse_fail(origin, line_no, "cannot parse value: " + val);
      v.kind = Kind::floating;
    }
    t.values_.emplace(dotted, std::move(v));
    t.order_.push_back(dotted);
  }
  return t;
}

TomlTable TomlTable::parse_file(const std::string& path) {
  return parse_string(read_file_bytes(path), path);
}

bool TomlTable::has(const std::string& key) const {
  return values_.count(key) != 0;
}

const TomlTable::Value& TomlTable::fetch(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw std::invalid_argument(origin_ + ": missing required key '" + key +
                                "'");
  return it->second;
}

std::string TomlTable::get_string(const std::string& key) const {
  const Value& v = fetch(key);
  if (v.kind != Kind::string)
    throw std::invalid_argument(origin_ + ": key '" + key +
                                "' must be a string");
  return v.text;
}

long long TomlTable::get_int(const std::string& key) const {
  const Value& v = fetch(key);
  if (v.kind != Kind::integer)
    throw std::invalid_argument(origin_ + ": key '" + key +
                                "' must be an integer");
  return v.i;
}

double TomlTable::get_double(const std::string& key) const {
  const Value& v = fetch(key);
  if (v.kind != Kind::floating && v.kind != Kind::integer)
    throw std::invalid_argument(origin_ + ": key '" + key +
                                "' must be a number");
  return v.d;
}

bool TomlTable::get_bool(const std::string& key) const {
  const Value& v = fetch(key);
  if (v.kind != Kind::boolean)
    throw std::invalid_argument(origin_ + ": key '" + key +
                                "' must be a boolean");
  return v.b;
}

std::string TomlTable::get_string_or(const std::string& key,
                                     const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

long long TomlTable::get_int_or(const std::string& key,
                                long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

double TomlTable::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

bool TomlTable::get_bool_or(const std::string& key, bool fallback) const {
  return has(key) ? get_bool(key) : fallback;
}

void TomlTable::require_known(const std::vector<std::string>& allowed) const {
  std::string offenders;
  for (const std::string& k : order_) {
    bool ok = false;
    for (const std::string& a : allowed)
      if (k == a) {
        ok = true;
        break;
      }
    if (!ok) offenders += (offenders.empty() ? "" : ", ") + ("'" + k + "'");
  }
  if (!offenders.empty())
    throw std::invalid_argument(origin_ + ": unknown key(s) " + offenders);
}

// ---------------------------------------------------------------------------
// CacheStore

namespace {
constexpr int kMaxProbeSlots = 16;
}

CacheStore::CacheStore(std::string dir) : dir_(std::move(dir)) {
  if (dir_.empty())
    throw std::invalid_argument("CacheStore: empty directory path");
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec)
    throw std::runtime_error("CacheStore: cannot create " + dir_ + ": " +
                             ec.message());
}

std::string CacheStore::resolve_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("SMECTIC_CACHE_DIR"); env && *env)
    return std::string(env);
  return ".smectic-cache";
}

std::string CacheStore::slot_base(const std::string& desc, int k) const {
  std::string base = dir_ + "/" + fnv1a64_hex(desc);
  if (k > 0) base += "-" + std::to_string(k);
  return base;
}

std::optional<std::string> CacheStore::lookup(const std::string& desc,
                                              std::string* warning) const {
  for (int k = 0; k < kMaxProbeSlots; ++k) {
    const std::string base = slot_base(desc, k);
    const std::string desc_path = base + ".desc";
    std::error_code ec;
    if (!fs::exists(desc_path, ec)) return std::nullopt;  // end of chain
    std::string stored;
    try {
      stored = read_file_bytes(desc_path);
    } catch (const std::exception&) {
      if (warning) *warning = "unreadable cache entry " + desc_path;
      return std::nullopt;
    }
    if (stored != desc) continue;  // hash collision: different problem
    try {
      return read_file_bytes(base + ".payload");
    } catch (const std::exception&) {
      if (warning)
        *warning = "cache entry " + base +
                   " has a matching description but no readable payload; "
                   "rebuilding";
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::string CacheStore::store(const std::string& desc,
                              const std::string& payload,
                              const std::string& meta_json) const {
  for (int k = 0; k < kMaxProbeSlots; ++k) {
    const std::string base = slot_base(desc, k);
    const std::string desc_path = base + ".desc";
    std::error_code ec;
    if (fs::exists(desc_path, ec)) {
      std::string stored;
      try {
        stored = read_file_bytes(desc_path);
      } catch (const std::exception&) {
        stored.clear();  // unreadable slot: reclaim it
      }
      if (!stored.empty() && stored != desc) continue;  // occupied by another
    }
    // Payload and metadata land before the description: a slot becomes
    // visible to lookups only once its artifact is complete.
    atomic_write_file(base + ".payload", payload);
    atomic_write_file(base + ".meta.json", meta_json);
    atomic_write_file(desc_path, desc);
    return base + ".payload";
  }
  throw std::runtime_error("CacheStore: probe chain exhausted for hash " +
                           fnv1a64_hex(desc));
}

}  // namespace smectic
