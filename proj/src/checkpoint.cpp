#include "crnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <zlib.h>

#include "crnet/errors.hpp"

namespace crnet {

namespace {

constexpr char kCheckpointMagic[8] = {'C', 'R', 'N', 'E', 'T', 'C', 'K', 'P'};
constexpr char kTensorMagic[8] = {'C', 'R', 'N', 'E', 'T', 'T', 'E', 'N'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out.insert(out.end(), b, b + n);
    }
    template <typename T>
    void le(T v) {
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
        U u = std::bit_cast<U>(v);
        for (std::size_t k = 0; k < sizeof(U); ++k) out.push_back(static_cast<std::uint8_t>(u >> (8 * k)));
    }
    void text(const std::string& s) {
        le(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    void crc() {
        le(static_cast<std::uint32_t>(crc32(0L, out.data(), static_cast<uInt>(out.size()))));
    }
    std::vector<std::uint8_t> out;
};

class Reader {
public:
    Reader(const std::vector<std::uint8_t>& b, std::size_t end) : buf(b), limit(end) {}
    void need(std::size_t n) const {
        if (pos + n > limit) throw ChecksumError("truncated data");
    }
    template <typename T>
    T le() {
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
        need(sizeof(U));
        U u = 0;
        for (std::size_t k = 0; k < sizeof(U); ++k) u |= static_cast<U>(static_cast<U>(buf[pos + k]) << (8 * k));
        pos += sizeof(U);
        return std::bit_cast<T>(u);
    }
    std::string text() {
        const auto n = le<std::uint32_t>();
        need(n);
        std::string s(reinterpret_cast<const char*>(buf.data() + pos), n);
        pos += n;
        return s;
    }
    void magic(const char (&m)[8]) {
        need(8);
        if (std::memcmp(buf.data() + pos, m, 8) != 0) throw ChecksumError("bad magic number");
        pos += 8;
    }
    const std::vector<std::uint8_t>& buf;
    std::size_t limit;
    std::size_t pos = 0;
};

// Verifies the trailing CRC and returns the payload length.
std::size_t check_crc(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 12) throw ChecksumError("file too short");
    const std::size_t body = bytes.size() - 4;
    Reader tail(bytes, bytes.size());
    tail.pos = body;
    const auto stored = tail.le<std::uint32_t>();
    const auto actual = static_cast<std::uint32_t>(crc32(0L, bytes.data(), static_cast<uInt>(body)));
    if (stored != actual) throw ChecksumError("CRC mismatch: file is corrupted");
    return body;
}

void write_shape(Writer& w, Shape s) {
    w.le(static_cast<std::uint64_t>(s.n));
    w.le(static_cast<std::uint64_t>(s.c));
    w.le(static_cast<std::uint64_t>(s.h));
    w.le(static_cast<std::uint64_t>(s.w));
}

Shape read_shape(Reader& r) {
    Shape s;
    s.n = r.le<std::uint64_t>();
    s.c = r.le<std::uint64_t>();
    s.h = r.le<std::uint64_t>();
    s.w = r.le<std::uint64_t>();
    if (s.n == 0 || s.c == 0 || s.h == 0 || s.w == 0) throw ChecksumError("stored tensor has an empty dimension");
    return s;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::string format_model_config(const Model& model) {
    std::ostringstream os;
    os << "model = " << model_kind_name(model.kind) << "\n";
    if (model.kind == ModelKind::crnet_a) {
        const auto& c = model.a;
        os << "channels = " << c.channels << "\nn0 = " << c.n0 << "\nm0 = " << c.m0 << "\nkernel = " << c.kernel
           << "\nrecursions = " << c.recursions << "\nglobal_residual = " << (c.global_residual ? 1 : 0) << "\n";
    } else {
        const auto& c = model.b;
        os << "channels = " << c.channels << "\nn0 = " << c.n0 << "\nm0 = " << c.m0 << "\nkernel = " << c.kernel
           << "\nrecursions = " << c.recursions << "\nscales = ";
        for (std::size_t k = 0; k < c.scales.size(); ++k) os << (k ? "," : "") << c.scales[k];
        os << "\n";
    }
    return os.str();
}

Model parse_model_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(' ');
            const auto e = s.find_last_not_of(' ');
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
    }
    auto get = [&](const std::string& k) -> const std::string& {
        auto it = kv.find(k);
        if (it == kv.end()) throw ChecksumError("model config lacks key '" + k + "'");
        return it->second;
    };
    auto num = [&](const std::string& k) -> std::size_t {
        try {
            return std::stoull(get(k));
        } catch (const std::logic_error&) {
            throw ChecksumError("model config key '" + k + "' is not a count");
        }
    };
    Model m;
    m.kind = parse_model_kind(get("model"));
    if (m.kind == ModelKind::crnet_a) {
        m.a.channels = num("channels");
        m.a.n0 = num("n0");
        m.a.m0 = num("m0");
        m.a.kernel = num("kernel");
        m.a.recursions = num("recursions");
        m.a.global_residual = num("global_residual") != 0;
        m.a.validate();
    } else {
        m.b.channels = num("channels");
        m.b.n0 = num("n0");
        m.b.m0 = num("m0");
        m.b.kernel = num("kernel");
        m.b.recursions = num("recursions");
        m.b.scales.clear();
        std::istringstream ss(get("scales"));
        std::string item;
        while (std::getline(ss, item, ',')) m.b.scales.push_back(std::stoull(item));
        m.b.validate();
    }
    return m;
}

std::vector<std::uint8_t> serialize_checkpoint(const Model& model, const CheckpointInfo& info, StorageType storage) {
    Writer w;
    w.bytes(kCheckpointMagic, 8);
    w.le(kVersion);
    w.le(static_cast<std::uint32_t>(model.kind));
    w.le(info.seed);
    w.le(info.epoch);
    w.le(info.step);
    w.text(format_model_config(model));
    w.le(static_cast<std::uint32_t>(model.params.size()));
    for (const Parameter& p : model.params) {
        w.text(p.name);
        w.le(static_cast<std::uint8_t>(storage));
        write_shape(w, p.tensor.shape());
        for (double v : p.tensor.data()) {
            if (storage == StorageType::f64) w.le(v);
            else w.le(static_cast<float>(v));
        }
    }
    w.crc();
    return std::move(w.out);
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
    const std::size_t body = check_crc(bytes);
    Reader r(bytes, body);
    r.magic(kCheckpointMagic);
    const auto version = r.le<std::uint32_t>();
    if (version != kVersion) throw ChecksumError("unsupported checkpoint version " + std::to_string(version));
    const auto kind = r.le<std::uint32_t>();
    if (kind > 1) throw ChecksumError("unknown model kind in checkpoint");
    Checkpoint ck;
    ck.info.seed = r.le<std::uint64_t>();
    ck.info.epoch = r.le<std::uint64_t>();
    ck.info.step = r.le<std::uint64_t>();
    ck.model = parse_model_config(r.text());
    if (static_cast<std::uint32_t>(ck.model.kind) != kind) throw ChecksumError("model kind mismatch in checkpoint");

    const auto expected = ck.model.kind == ModelKind::crnet_a ? crneta_parameter_shapes(ck.model.a)
                                                              : crnetb_parameter_shapes(ck.model.b);
    const auto count = r.le<std::uint32_t>();
    if (count != expected.size()) {
        throw ShapeError("checkpoint holds " + std::to_string(count) + " tensors, architecture needs " +
                         std::to_string(expected.size()));
    }
    for (std::uint32_t k = 0; k < count; ++k) {
        std::string name = r.text();
        const auto storage = r.le<std::uint8_t>();
        if (storage > 1) throw ChecksumError("unknown storage type for '" + name + "'");
        const Shape shape = read_shape(r);
        if (name != expected[k].first || !(shape == expected[k].second)) {
            throw ShapeError("checkpoint tensor '" + name + "' " + shape.str() + " does not match '" + expected[k].first +
                             "' " + expected[k].second.str());
        }
        Tensor4 t(shape);
        for (double& v : t.data()) v = storage == 0 ? r.le<double>() : static_cast<double>(r.le<float>());
        ck.model.params.add(std::move(name), std::move(t));
    }
    if (r.pos != body) throw ChecksumError("trailing bytes in checkpoint");
    return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, const CheckpointInfo& info,
                     StorageType storage) {
    write_file(path, serialize_checkpoint(model, info, storage));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(read_file(path)); }

void save_tensor(const std::filesystem::path& path, const Tensor4& t) {
    Writer w;
    w.bytes(kTensorMagic, 8);
    write_shape(w, t.shape());
    for (double v : t.data()) w.le(v);
    w.crc();
    write_file(path, w.out);
}

Tensor4 load_tensor(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    const std::size_t body = check_crc(bytes);
    Reader r(bytes, body);
    r.magic(kTensorMagic);
    const Shape shape = read_shape(r);
    if ((body - r.pos) != shape.size() * 8) throw ChecksumError("tensor file size does not match its shape");
    Tensor4 t(shape);
    for (double& v : t.data()) v = r.le<double>();
    return t;
}

}  // namespace crnet
