#include "stablelike/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <openssl/evp.h>

#include "stablelike/errors.hpp"
#include "stablelike/simulate.hpp"
#include "stablelike/version.hpp"

namespace stablelike::manifest {

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256: digest failed");
    std::string out;
    char b[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(b, sizeof b, "%02x", md[i]);
        out += b;
    }
    return out;
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Manifest::Manifest(std::string command) : command_(std::move(command)), started_(utc_now()) {}

void Manifest::set_argv(int argc, char** argv) {
    for (int i = 0; i < argc; ++i) argv_.push_back(argv[i]);
}

void Manifest::add_input(const std::string& path, const std::string& content) {
    inputs_.push_back({{"path", path}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
}

void Manifest::add_output(const std::string& path, const std::string& content) {
    outputs_.push_back({{"path", path}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
}

json Manifest::to_json() const {
    json j{{"schema", "stablelike.manifest/1"}, {"command", command_}, {"argv", argv_}, {"tool_version", kVersion}};
    j["config_echo"] = config_;
    j["seed"] = seed_ ? json(*seed_) : json(nullptr);
    j["rng"] = simulate::kGeneratorId;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    j["timestamps"] = {{"started", started_}, {"finished", utc_now()}};
    return j;
}

void write_output(const std::string& path, const std::string& content, Manifest* m) {
    if (path == "-") {
        std::cout << content;
        return;
    }
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open output file " + path);
    os << content;
    os.close();
    if (!os) throw Error("failed writing " + path);
    if (m) m->add_output(path, content);
}

} // namespace stablelike::manifest
