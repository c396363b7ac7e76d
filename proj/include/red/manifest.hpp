#pragma once

// Run manifests (written next to every output file) and atomic file writes.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "red/error.hpp"

namespace red {

inline constexpr const char* kToolVersion = "1.0.0";

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes to a temporary sibling, then renames over the target.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot move output into place at '" + path + "': " + ec.message());
    }
}

/// 64-bit FNV-1a over each input's bytes, inputs separated by a zero byte.
inline std::string content_digest(const std::vector<std::string>& contents) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ULL;
    };
    for (const auto& c : contents) {
        for (unsigned char ch : c) mix(ch);
        mix(0);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a64:") + buf;
}

struct RunManifest {
    std::string command;
    std::vector<std::string> argv;  ///< arguments after the program name, replayable as-is
    std::vector<std::string> inputs;
    std::string input_digest;
    nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
    std::vector<std::string> outputs;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["tool"] = "red";
        j["tool_version"] = kToolVersion;
        j["command"] = command;
        j["argv"] = argv;
        j["inputs"] = inputs;
        j["input_digest"] = input_digest;
        j["parameters"] = parameters;
        j["outputs"] = outputs;
        return j;
    }

    static RunManifest from_json(const nlohmann::json& j) {
        RunManifest m;
        try {
            m.command = j.at("command").get<std::string>();
            m.argv = j.at("argv").get<std::vector<std::string>>();
            m.inputs = j.at("inputs").get<std::vector<std::string>>();
            m.input_digest = j.at("input_digest").get<std::string>();
            m.outputs = j.at("outputs").get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception& ex) {
            throw ParseError(std::string("malformed manifest: ") + ex.what());
        }
        return m;
    }
};

inline std::string manifest_path_for(const std::string& output) { return output + ".manifest.json"; }

}  // namespace red
