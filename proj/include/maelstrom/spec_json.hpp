#pragma once

// JSON encodings of the core and assembly specs, and a strict object reader
// used by every config parser: unknown keys and wrong types are ConfigErrors
// that name the dotted field path.

#include <cstdint>
#include <set>
#include <string>
#include <string_view>

#include "json.hpp"

#include "maelstrom/assembly.hpp"
#include "maelstrom/core.hpp"

namespace maelstrom {

using Json = nlohmann::ordered_json;

std::uint64_t fnv1a(std::string_view bytes) noexcept;
/// 16 hex digits of FNV-1a over the compact dump of j.
std::string digest(const Json& j);

Activation activation_from_string(const std::string& s, const std::string& path);

Json to_json(const MaelstromConfig& c);
Json to_json(const LayerSpec& l);
Json to_json(const HeadSpec& h);
Json to_json(const AssemblySpec& a);

MaelstromConfig maelstrom_config_from_json(const Json& j, const std::string& path = "maelstrom");
HeadSpec head_spec_from_json(const Json& j, const std::string& path = "head");
AssemblySpec assembly_spec_from_json(const Json& j, const std::string& path = "assembly");

class Fields {
  public:
    Fields(const Json& object, std::string path);

    bool has(const std::string& key) const { return obj_.contains(key); }
    std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    /// Raw member; throws ConfigError naming the field when absent.
    const Json& require(const std::string& key);
    const Json* optional(const std::string& key);

    std::size_t count(const std::string& key, std::size_t fallback);
    std::uint64_t u64(const std::string& key, std::uint64_t fallback);
    double real(const std::string& key, double fallback);
    bool flag(const std::string& key, bool fallback);
    std::string text(const std::string& key, const std::string& fallback);

    std::size_t as_count(const Json& v, const std::string& key) const;
    std::uint64_t as_u64(const Json& v, const std::string& key) const;
    double as_real(const Json& v, const std::string& key) const;

    /// Throws ConfigError on any member that was never read.
    void finish() const;

  private:
    const Json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace maelstrom
