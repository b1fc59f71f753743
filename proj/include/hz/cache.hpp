#pragma once

// Content-addressed result cache: entries are JSON files named by the FNV-1a
// hash of a canonical key string; the full key is stored inside and compared
// verbatim on load, so hash collisions or corrupted entries fall back to
// recomputation. Writes are atomic (temp file + rename).

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

// vendored single-header nlohmann/json
#include <json.hpp>

namespace hz {

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

class ResultCache {
  public:
    ResultCache(std::filesystem::path dir, bool enabled)
        : dir_(std::move(dir)), enabled_(enabled) {
        if (enabled_) std::filesystem::create_directories(dir_);
    }

    std::optional<nlohmann::json> load(const std::string& key) const {
        if (!enabled_) return std::nullopt;
        auto path = entry_path(key);
        if (!std::filesystem::exists(path)) return std::nullopt;
        try {
            std::ifstream in(path);
            nlohmann::json doc = nlohmann::json::parse(in);
            if (doc.at("key").get<std::string>() != key) return std::nullopt;  // collision
            return doc.at("payload");
        } catch (const std::exception&) {
            return std::nullopt;  // corrupted entries are recomputed, never trusted
        }
    }

    void store(const std::string& key, nlohmann::json payload) const {
        if (!enabled_) return;
        nlohmann::json doc;
        doc["key"] = key;
        doc["payload"] = std::move(payload);
        auto path = entry_path(key);
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp);
            out << doc.dump(1);
        }
        std::filesystem::rename(tmp, path);
    }

    bool enabled() const { return enabled_; }

  private:
    std::filesystem::path entry_path(const std::string& key) const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(fnv1a64(key)));
        return dir_ / (std::string(buf) + ".json");
    }

    std::filesystem::path dir_;
    bool enabled_;
};

}  // namespace hz
