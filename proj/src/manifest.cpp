#include "courtaudit/manifest.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <array>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "courtaudit/text_io.hpp"

namespace courtaudit {

namespace {

using EvpCtx = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

std::string hex_digest(const unsigned char* digest, unsigned int length) {
    static const char* kHex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0x0F]);
    }
    return out;
}

EvpCtx make_sha256_ctx() {
    EvpCtx ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 context initialization failed");
    return ctx;
}

std::string finish(EvpCtx& ctx) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1)
        throw std::runtime_error("sha256 finalization failed");
    return hex_digest(digest, length);
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    EvpCtx ctx = make_sha256_ctx();
    if (EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1)
        throw std::runtime_error("sha256 update failed");
    return finish(ctx);
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    EvpCtx ctx = make_sha256_ctx();
    std::array<char, 1 << 16> buffer;
    while (in) {
        in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        const std::streamsize got = in.gcount();
        if (got > 0 &&
            EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(got)) != 1)
            throw std::runtime_error("sha256 update failed");
    }
    return finish(ctx);
}

std::string Manifest::to_json() const {
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["stage"] = stage;
    j["seed"] = seed;
    j["parameters"] = parameters;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    return j.dump(2) + "\n";
}

void Manifest::write(const std::filesystem::path& path) const {
    write_file_atomic(path, to_json());
}

Manifest Manifest::load(const std::filesystem::path& path) {
    const nlohmann::json j = nlohmann::json::parse(read_file(path));
    Manifest m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != 1)
        throw std::runtime_error("unsupported manifest schema version " +
                                 std::to_string(m.schema_version));
    m.stage = j.at("stage").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.parameters = j.at("parameters").get<std::map<std::string, std::string>>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    return m;
}

RunLock::RunLock(const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    path_ = directory / ".courtaudit.lock";
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
        throw std::runtime_error("output directory is locked by another run (" +
                                 path_.string() + " exists; remove it if stale)");
    const std::string pid = std::to_string(::getpid()) + "\n";
    // best effort: the pid is diagnostic only
    if (::write(fd, pid.data(), pid.size()) < 0) { /* ignore */ }
    ::close(fd);
    held_ = true;
}

RunLock::~RunLock() {
    if (held_) {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
}

}  // namespace courtaudit
