#pragma once

// Run manifests for the CLI. Compiled in src/manifest.cpp (needs libcrypto).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace stablelike::manifest {

using json = nlohmann::ordered_json;

std::string sha256_hex(const std::string& data);
std::string utc_now();

/// Inputs are hashed when registered, i.e. before any result is written.
class Manifest {
public:
    explicit Manifest(std::string command);
    void set_argv(int argc, char** argv);
    void add_input(const std::string& path, const std::string& content);
    void set_config(json c) { config_ = std::move(c); }
    void set_seed(std::uint64_t s) { seed_ = s; }
    void add_output(const std::string& path, const std::string& content);
    json to_json() const;

private:
    std::string command_;
    std::string started_;
    std::vector<std::string> argv_;
    json inputs_ = json::array();
    json outputs_ = json::array();
    json config_ = json::object();
    std::optional<std::uint64_t> seed_;
};

/// Writes a file (or stdout for "-") and lists it in the manifest.
void write_output(const std::string& path, const std::string& content, Manifest* m);

} // namespace stablelike::manifest
