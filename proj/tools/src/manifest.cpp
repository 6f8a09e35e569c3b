#include <chrono>
#include <ctime>
#include <fstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "kvar/error.hpp"
#include "kvar_cli/cli.hpp"

namespace kvar::cli {

nlohmann::json to_json(const RunManifest& m) {
    return {
        {"command", m.command},         {"arguments", m.arguments}, {"parameters", m.parameters},
        {"master_seed", m.master_seed}, {"version", m.version},     {"started_at", m.started_at},
        {"outputs", m.outputs},
    };
}

RunManifest manifest_from_json(const nlohmann::json& j) {
    try {
        RunManifest m;
        m.command = j.at("command").get<std::string>();
        m.arguments = j.at("arguments").get<std::vector<std::string>>();
        m.parameters = j.value("parameters", nlohmann::json::object());
        m.master_seed = j.at("master_seed").get<std::uint64_t>();
        m.version = j.value("version", std::string{});
        m.started_at = j.value("started_at", std::string{});
        m.outputs = j.value("outputs", std::vector<std::string>{});
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(fmt::format("malformed manifest: {}", e.what()), 0);
    }
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
    std::ofstream file(path);
    if (!file) {
        throw IoError(fmt::format("cannot write manifest '{}'", path.string()));
    }
    file << to_json(m).dump(2) << '\n';
    if (!file) {
        throw IoError(fmt::format("failed writing manifest '{}'", path.string()));
    }
}

RunManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) {
        throw IoError(fmt::format("cannot open manifest '{}'", path.string()));
    }
    nlohmann::json j;
    try {
        file >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(fmt::format("manifest '{}' is not valid JSON: {}", path.string(), e.what()), 0);
    }
    return manifest_from_json(j);
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

}  // namespace kvar::cli
