#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace courtaudit {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// Provenance record written after a pipeline stage completes: the resolved
// parameters it ran with and content digests of everything it read and wrote.
// Two runs with identical configs and inputs produce identical manifests.
struct Manifest {
    int schema_version = 1;
    std::string stage;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> parameters;  // resolved key = value
    std::map<std::string, std::string> inputs;      // file name -> sha256
    std::map<std::string, std::string> outputs;     // file name -> sha256

    std::string to_json() const;
    void write(const std::filesystem::path& path) const;
    static Manifest load(const std::filesystem::path& path);
};

// Exclusive per-directory lock so only one subcommand works an output
// directory at a time. Construction takes the lock or throws; destruction
// releases it.
class RunLock {
public:
    explicit RunLock(const std::filesystem::path& directory);
    ~RunLock();
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    std::filesystem::path path_;
    bool held_ = false;
};

}  // namespace courtaudit
