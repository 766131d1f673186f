#include <bit>
#include <cstring>
#include <fstream>

#include "chainlens/embeddings.hpp"
#include "chainlens/error.hpp"

namespace chainlens {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'K', 'G', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
        std::memcpy(&v, bytes, sizeof(T));
    }
    return v;
}

class Writer {
public:
    explicit Writer(std::ofstream& out) : out_(out) {}
    template <typename T>
    void put(T v) {
        v = to_little(v);
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void block(const std::vector<double>& values) {
        put<std::uint64_t>(values.size());
        for (double v : values) put(std::bit_cast<std::uint64_t>(v));
    }

private:
    std::ofstream& out_;
};

class Reader {
public:
    Reader(std::ifstream& in, const std::filesystem::path& path) : in_(in), path_(path) {}
    template <typename T>
    T get() {
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (!in_) throw Error("truncated checkpoint " + path_.string());
        return to_little(v);
    }
    std::vector<double> block(std::size_t expected) {
        auto n = get<std::uint64_t>();
        if (n != expected) throw Error("checkpoint block size mismatch in " + path_.string());
        std::vector<double> values(n);
        for (auto& v : values) v = std::bit_cast<double>(get<std::uint64_t>());
        return values;
    }

private:
    std::ifstream& in_;
    const std::filesystem::path& path_;
};

}  // namespace

void save_checkpoint(const ModelParams& params, std::uint64_t vocabulary_hash, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out.write(kMagic, sizeof kMagic);
    Writer w(out);
    w.put(kVersion);
    w.put(static_cast<std::uint8_t>(params.kind));
    w.put(static_cast<std::uint8_t>(params.transe_norm));
    w.put<std::uint64_t>(params.dim);
    w.put<std::uint64_t>(params.num_entities);
    w.put<std::uint64_t>(params.num_relations);
    w.put<std::uint64_t>(params.seed);
    w.put<std::uint64_t>(vocabulary_hash);
    w.block(params.entity);
    w.block(params.relation);
    w.block(params.core);
    if (!out) throw Error("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint " + path.string());
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error(path.string() + " is not a checkpoint");
    Reader r(in, path);
    if (r.get<std::uint32_t>() != kVersion) throw Error("unsupported checkpoint version in " + path.string());
    Checkpoint ck;
    auto& p = ck.params;
    auto kind = r.get<std::uint8_t>();
    auto norm = r.get<std::uint8_t>();
    if (kind >= kAllModelKinds.size() || norm > 1) throw Error("corrupt checkpoint header in " + path.string());
    p.kind = static_cast<ModelKind>(kind);
    p.transe_norm = static_cast<DistanceNorm>(norm);
    p.dim = r.get<std::uint64_t>();
    p.num_entities = r.get<std::uint64_t>();
    p.num_relations = r.get<std::uint64_t>();
    p.seed = r.get<std::uint64_t>();
    ck.vocabulary_hash = r.get<std::uint64_t>();
    p.entity = r.block(p.num_entities * p.entity_width());
    p.relation = r.block(p.num_relations * p.relation_width());
    p.core = r.block(p.kind == ModelKind::TuckER ? p.dim * p.dim * p.dim : 0);
    return ck;
}

}  // namespace chainlens
