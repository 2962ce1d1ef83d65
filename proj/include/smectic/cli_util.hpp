// Infrastructure backing the command-line driver: atomic artifact writes, a
// TOML-subset reader for run configurations, and a content-addressed result
// cache.
//
// Artifacts are always written through a sibling temporary file followed by
// a rename, so an interrupted run never leaves a partial file at the
// requested path.  Cache entries are keyed by a hash of the full problem
// description, but the description itself is stored beside the payload and
// compared byte-for-byte on lookup: a hash collision can never alias two
// different problems, it only pushes the newcomer to a probe slot.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace smectic {

// Reads the whole file in binary mode; throws std::runtime_error on failure.
std::string read_file_bytes(const std::string& path);

// Writes bytes to `path` atomically (temp file in the same directory, then
// rename).  Throws std::runtime_error on I/O failure, leaving no partial
// file at `path`.
void atomic_write_file(const std::string& path, const std::string& bytes);

// 64-bit FNV-1a of the bytes, formatted as 16 lowercase hex digits.
std::string fnv1a64_hex(const std::string& bytes);

// ---------------------------------------------------------------------------
// TOML subset: `[section]` headers and `key = value` pairs, with full-line
// or trailing `#` comments.  Values are quoted strings, booleans, integers,
// or floats.  Keys are addressed as "section.key" (bare "key" before any
// header).  Duplicate keys, malformed lines, and type mismatches are
// reported as std::invalid_argument with the offending line or key named.
class TomlTable {
 public:
  enum class Kind { string, integer, floating, boolean };

  static TomlTable parse_string(const std::string& text,
                                const std::string& origin = "<string>");
  static TomlTable parse_file(const std::string& path);

  bool has(const std::string& key) const;
  const std::vector<std::string>& keys() const { return order_; }  // file order

  std::string get_string(const std::string& key) const;
  long long get_int(const std::string& key) const;
  double get_double(const std::string& key) const;  // integer values accepted
  bool get_bool(const std::string& key) const;

  std::string get_string_or(const std::string& key,
                            const std::string& fallback) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  double get_double_or(const std::string& key, double fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;

  // Throws std::invalid_argument naming every key that is not in `allowed`.
  // Configs are validated closed-world: an unrecognized key is an error, not
  // a silent no-op.
  void require_known(const std::vector<std::string>& allowed) const;

 private:
  struct Value {
    Kind kind = Kind::string;
    std::string text;  // string contents (unescaped) for Kind::string
    long long i = 0;
    double d = 0.0;
    bool b = false;
  };

  const Value& fetch(const std::string& key) const;

  std::map<std::string, Value> values_;
  std::vector<std::string> order_;
  std::string origin_;
};

// ---------------------------------------------------------------------------
// Content-addressed cache over a directory.  Slot k of a description holds
// three files named by the description hash (suffixed "-k" for k > 0):
//   <hash>[-k].desc       the full problem description, bytes
//   <hash>[-k].payload    the artifact bytes
//   <hash>[-k].meta.json  provenance (tool version, timestamp, parameters)
// The .desc file is written last, so a slot is live only once its payload
// is complete.  Lookup walks slots until the first missing .desc.
class CacheStore {
 public:
  explicit CacheStore(std::string dir);  // creates the directory if needed

  // Cache directory resolution: a non-empty flag wins, then the
  // SMECTIC_CACHE_DIR environment variable, then ".smectic-cache" in the
  // working directory.
  static std::string resolve_dir(const std::string& flag_value);

  // Payload bytes on a byte-matched hit, nullopt on a miss.  A slot whose
  // description matches but whose payload cannot be read is corruption: the
  // lookup misses, `warning` (if given) explains, and the caller's rebuild
  // re-stores the slot.
  std::optional<std::string> lookup(const std::string& desc,
                                    std::string* warning = nullptr) const;

  // Writes payload and metadata into the description's slot, each file
  // atomically, and returns the payload path.
  std::string store(const std::string& desc, const std::string& payload,
                    const std::string& meta_json) const;

  const std::string& dir() const { return dir_; }

 private:
  std::string slot_base(const std::string& desc, int k) const;

  std::string dir_;
};

}  // namespace smectic
