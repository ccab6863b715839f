#include "codinet/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

namespace codinet {

namespace {

// Parameter names follow structure order so load can fill by name.
std::map<std::string, Tensor> named_parameters(DynamicNet& net) {
    std::map<std::string, Tensor> out;
    StemHead& sh = net.stem_head();
    out["stem.w"] = sh.stem_w;
    out["stem.b"] = sh.stem_b;
    out["head.w"] = sh.head_w;
    out["head.b"] = sh.head_b;
    for (std::size_t k = 0; k < net.blocks().size(); ++k) {
        const std::string p = "block" + std::to_string(k) + ".";
        out[p + "w1"] = net.blocks()[k].w1;
        out[p + "b1"] = net.blocks()[k].b1;
        out[p + "w2"] = net.blocks()[k].w2;
        out[p + "b2"] = net.blocks()[k].b2;
    }
    for (std::size_t k = 0; k < net.routers().size(); ++k) {
        const std::string p = "router" + std::to_string(k) + ".";
        out[p + "w1"] = net.routers()[k].w1;
        out[p + "b1"] = net.routers()[k].b1;
        out[p + "w2"] = net.routers()[k].w2;
        out[p + "b2"] = net.routers()[k].b2;
    }
    return out;
}

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw IoError("truncated checkpoint: " + path);
    return v;
}

void write_string(std::ofstream& out, const std::string& s) {
    write_pod<std::uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in, const std::string& path) {
    const auto len = read_pod<std::uint64_t>(in, path);
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    if (!in) throw IoError("truncated checkpoint: " + path);
    return s;
}

} // namespace

void save_checkpoint(const std::string& path, DynamicNet& net, const Config& config,
                     std::uint64_t epoch) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);

    out.write(Checkpoint::kMagic, sizeof(Checkpoint::kMagic));
    write_pod<std::uint32_t>(out, Checkpoint::kVersion);
    write_string(out, config.to_text());
    write_pod<std::uint64_t>(out, config.train.seed);
    write_pod<std::uint64_t>(out, epoch);
    const std::uint32_t precision = config.train.quantize_float32 ? 1 : 0;
    write_pod<std::uint32_t>(out, precision);

    auto params = named_parameters(net);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
    for (auto& [name, tensor] : params) {
        write_string(out, name);
        write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.shape().size()));
        for (int e : tensor.shape()) write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(e));
        write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(tensor.size()));
        if (precision == 1) {
            for (double v : tensor.value()) {
                const float f = static_cast<float>(v);
                write_pod<float>(out, f);
            }
        } else {
            out.write(reinterpret_cast<const char*>(tensor.value().data()),
                      static_cast<std::streamsize>(sizeof(double) * tensor.value().size()));
        }
    }
    if (!out) throw IoError("failed writing checkpoint: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);

    char magic[sizeof(Checkpoint::kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, Checkpoint::kMagic, sizeof(magic)) != 0)
        throw DataError("not a codinet checkpoint: " + path);
    const auto version = read_pod<std::uint32_t>(in, path);
    if (version != Checkpoint::kVersion)
        throw DataError("checkpoint format version " + std::to_string(version) +
                        " is not supported (expected " + std::to_string(Checkpoint::kVersion) + ")");

    LoadedCheckpoint loaded;
    const std::string config_text = read_string(in, path);
    loaded.meta.config = parse_config_text(config_text);
    loaded.meta.seed = read_pod<std::uint64_t>(in, path);
    loaded.meta.epoch = read_pod<std::uint64_t>(in, path);
    loaded.meta.float32 = read_pod<std::uint32_t>(in, path) == 1;

    Rng rng(loaded.meta.seed);
    loaded.net = DynamicNet::build(loaded.meta.config.net, loaded.meta.config.gumbel, rng);
    auto params = named_parameters(loaded.net);

    const auto count = read_pod<std::uint32_t>(in, path);
    if (count != params.size())
        throw DataError("checkpoint holds " + std::to_string(count) + " arrays, net expects " +
                        std::to_string(params.size()));
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::string name = read_string(in, path);
        auto it = params.find(name);
        if (it == params.end()) throw DataError("checkpoint has unknown array '" + name + "'");
        Tensor t = it->second;
        const auto rank = read_pod<std::uint32_t>(in, path);
        Shape shape(rank);
        for (auto& e : shape) e = static_cast<int>(read_pod<std::uint32_t>(in, path));
        if (shape != t.shape())
            throw DataError("checkpoint array '" + name + "' has shape " + shape_str(shape) +
                            ", net expects " + shape_str(t.shape()));
        const auto n = read_pod<std::uint64_t>(in, path);
        if (n != static_cast<std::uint64_t>(t.size()))
            throw DataError("checkpoint array '" + name + "' has wrong element count");
        auto vals = t.mutable_value();
        if (loaded.meta.float32) {
            for (auto& v : vals) v = static_cast<double>(read_pod<float>(in, path));
        } else {
            in.read(reinterpret_cast<char*>(vals.data()),
                    static_cast<std::streamsize>(sizeof(double) * vals.size()));
            if (!in) throw IoError("truncated checkpoint: " + path);
        }
    }
    return loaded;
}

} // namespace codinet
