#include "flowcast/io.hpp"

#include <array>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "flowcast/errors.hpp"

namespace flowcast::io {

namespace {

class ByteWriter {
public:
    void raw(const void* p, std::size_t n) {
        buf_.append(static_cast<const char*>(p), n);
    }
    void tag(const char* four) { raw(four, 4); }
    void u8(std::uint8_t v) { raw(&v, 1); }
    void u32(std::uint32_t v) {
        std::array<unsigned char, 4> b{};
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        raw(b.data(), 4);
    }
    void u64(std::uint64_t v) {
        std::array<unsigned char, 8> b{};
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        raw(b.data(), 8);
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void f64s(const std::vector<double>& v) {
        for (double x : v) f64(x);
    }
    const std::string& str() const { return buf_; }

private:
    std::string buf_;
};

class ByteReader {
public:
    ByteReader(const std::string& data, std::string path)
        : data_(data), path_(std::move(path)) {}

    void raw(void* p, std::size_t n) {
        if (pos_ + n > data_.size())
            throw IoError("truncated file: " + path_);
        std::memcpy(p, data_.data() + pos_, n);
        pos_ += n;
    }
    std::string tag() {
        char b[4];
        raw(b, 4);
        return std::string(b, 4);
    }
    std::uint8_t u8() {
        std::uint8_t v;
        raw(&v, 1);
        return v;
    }
    std::uint32_t u32() {
        unsigned char b[4];
        raw(b, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        unsigned char b[8];
        raw(b, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    void f64s(std::vector<double>& out, std::size_t n) {
        out.resize(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = f64();
    }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    const std::string& data_;
    std::string path_;
    std::size_t pos_ = 0;
};

std::string meta_path(const std::string& path) { return path + ".meta"; }

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += format_double(v[i]);
    }
    return out;
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("short write: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --------------------------------------------------------------------------
// FMCK
// --------------------------------------------------------------------------

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    if (ck.kind.size() != 4) throw UsageError("checkpoint kind tag must be 4 chars");
    ck.params.validate();
    ByteWriter w;
    w.tag("FMCK");
    w.u32(1);
    w.tag(ck.kind.c_str());
    w.u32(ck.params.activation == nn::Activation::tanh ? 0u : 1u);
    w.u32(static_cast<std::uint32_t>(ck.params.layer_dims.size()));
    for (std::size_t d : ck.params.layer_dims) w.u32(static_cast<std::uint32_t>(d));
    for (std::size_t k = 0; k < ck.params.layer_count(); ++k) {
        w.f64s(ck.params.weights[k]);
        w.f64s(ck.params.biases[k]);
    }
    w.u32(static_cast<std::uint32_t>(ck.norm.dim()));
    w.f64s(ck.norm.mean);
    w.f64s(ck.norm.stdev);
    for (std::uint8_t c : ck.norm.constant) w.u8(c);
    w.f64(ck.horizon);
    write_file_atomic(path, w.str());
}

Checkpoint load_checkpoint(const std::string& path) {
    const std::string data = read_file(path);
    ByteReader r(data, path);
    if (r.tag() != "FMCK") throw IoError("not an FMCK file: " + path);
    const std::uint32_t version = r.u32();
    if (version != 1) throw IoError("unsupported FMCK version " + std::to_string(version));
    Checkpoint ck;
    ck.kind = r.tag();
    const std::uint32_t act = r.u32();
    if (act > 1) throw IoError("bad activation tag in " + path);
    ck.params.activation = act == 0 ? nn::Activation::tanh : nn::Activation::silu;
    const std::uint32_t ndims = r.u32();
    if (ndims < 2 || ndims > 64) throw IoError("bad layer count in " + path);
    ck.params.layer_dims.resize(ndims);
    for (auto& d : ck.params.layer_dims) d = r.u32();
    ck.params.weights.resize(ndims - 1);
    ck.params.biases.resize(ndims - 1);
    for (std::size_t k = 0; k + 1 < ndims; ++k) {
        r.f64s(ck.params.weights[k],
               ck.params.layer_dims[k + 1] * ck.params.layer_dims[k]);
        r.f64s(ck.params.biases[k], ck.params.layer_dims[k + 1]);
    }
    const std::uint32_t norm_dim = r.u32();
    r.f64s(ck.norm.mean, norm_dim);
    r.f64s(ck.norm.stdev, norm_dim);
    ck.norm.constant.resize(norm_dim);
    for (auto& c : ck.norm.constant) c = r.u8();
    ck.horizon = r.f64();
    ck.params.validate();
    return ck;
}

// --------------------------------------------------------------------------
// FMDS
// --------------------------------------------------------------------------

namespace {

std::string fmds_header(const Shape& shape, std::uint64_t count, double horizon) {
    ByteWriter w;
    w.tag("FMDS");
    w.u32(1);
    w.u32(shape.c);
    w.u32(shape.h);
    w.u32(shape.w);
    w.u64(count);
    w.f64(horizon);
    return w.str();
}

struct FmdsPayload {
    Shape shape;
    std::uint64_t count = 0;
    double horizon = 0.0;
    std::size_t arity = 0;  // states per record
    std::vector<double> values;
};

FmdsPayload read_fmds(const std::string& path) {
    const std::string data = read_file(path);
    ByteReader r(data, path);
    if (r.tag() != "FMDS") throw IoError("not an FMDS file: " + path);
    const std::uint32_t version = r.u32();
    if (version != 1) throw IoError("unsupported FMDS version " + std::to_string(version));
    FmdsPayload p;
    p.shape.c = r.u32();
    p.shape.h = r.u32();
    p.shape.w = r.u32();
    p.count = r.u64();
    p.horizon = r.f64();
    const std::size_t state_bytes = p.shape.size() * 8;
    if (p.count > 0) {
        if (state_bytes == 0 || r.remaining() % (p.count * state_bytes) != 0)
            throw IoError("FMDS payload size mismatch: " + path);
        p.arity = r.remaining() / (p.count * state_bytes);
        if (p.arity != 1 && p.arity != 2)
            throw IoError("FMDS record arity must be 1 or 2: " + path);
    } else {
        p.arity = r.remaining() == 0 ? 0 : 2;
    }
    r.f64s(p.values, p.count * p.arity * p.shape.size());
    return p;
}

}  // namespace

void save_dataset(const std::string& path, const dynamics::Dataset& ds) {
    ByteWriter w;
    const std::string hdr = fmds_header(ds.shape, ds.count(), ds.horizon);
    w.raw(hdr.data(), hdr.size());
    for (const auto& pr : ds.pairs) {
        if (pr.q0.size() != ds.dim() || pr.qT.size() != ds.dim())
            throw ShapeError("dataset pair has wrong dimension");
        w.f64s(pr.q0);
        w.f64s(pr.qT);
    }
    write_file_atomic(path, w.str());

    std::ostringstream meta;
    meta << "container = dataset\n"
         << "generator = " << ds.meta.generator << "\n"
         << "seed = " << ds.meta.seed << "\n"
         << "count = " << ds.count() << "\n"
         << "shape = " << ds.shape.str() << "\n"
         << "horizon = " << format_double(ds.horizon) << "\n"
         << "norm_mean = " << join_doubles(ds.norm.mean) << "\n"
         << "norm_std = " << join_doubles(ds.norm.stdev) << "\n"
         << "norm_constant = ";
    for (std::size_t i = 0; i < ds.norm.constant.size(); ++i)
        meta << (i ? "," : "") << int(ds.norm.constant[i]);
    meta << "\n";
    write_file_atomic(meta_path(path), meta.str());
}

dynamics::Dataset load_dataset(const std::string& path) {
    FmdsPayload p = read_fmds(path);
    if (p.count > 0 && p.arity != 2)
        throw IoError("FMDS file does not hold pairs: " + path);
    dynamics::Dataset ds;
    ds.shape = p.shape;
    ds.horizon = p.horizon;
    const std::size_t d = p.shape.size();
    ds.pairs.resize(p.count);
    for (std::size_t i = 0; i < p.count; ++i) {
        const double* base = p.values.data() + i * 2 * d;
        ds.pairs[i].q0.assign(base, base + d);
        ds.pairs[i].qT.assign(base + d, base + 2 * d);
    }
    std::error_code ec;
    if (std::filesystem::exists(meta_path(path), ec)) {
        const auto kv = parse_kv(read_file(meta_path(path)));
        if (auto it = kv.find("generator"); it != kv.end()) ds.meta.generator = it->second;
        if (auto it = kv.find("seed"); it != kv.end()) ds.meta.seed = std::stoull(it->second);
        if (auto it = kv.find("norm_mean"); it != kv.end()) {
            ds.norm.mean = split_doubles(it->second);
            ds.norm.stdev = split_doubles(kv.at("norm_std"));
            ds.norm.constant.assign(ds.norm.mean.size(), 0);
            if (auto ct = kv.find("norm_constant"); ct != kv.end()) {
                const auto flags = split_doubles(ct->second);
                for (std::size_t i = 0; i < flags.size() && i < ds.norm.constant.size(); ++i)
                    ds.norm.constant[i] = flags[i] != 0.0 ? 1 : 0;
            }
        }
    }
    if (ds.norm.dim() != d) ds.refresh_norm();
    return ds;
}

void save_ensemble(const std::string& path, const Ensemble& e) {
    e.validate();
    ByteWriter w;
    const std::string hdr = fmds_header(e.shape, e.size(), e.meta.horizon);
    w.raw(hdr.data(), hdr.size());
    for (const auto& m : e.members) w.f64s(m);
    write_file_atomic(path, w.str());

    std::ostringstream meta;
    meta << "container = ensemble\n"
         << "source = " << e.meta.source << "\n"
         << "seed = " << e.meta.seed << "\n"
         << "sigma = " << format_double(e.meta.sigma) << "\n"
         << "family = " << e.meta.family << "\n"
         << "horizon = " << format_double(e.meta.horizon) << "\n"
         << "steps = " << e.meta.steps << "\n"
         << "source_hash = " << e.meta.source_hash << "\n"
         << "count = " << e.size() << "\n"
         << "shape = " << e.shape.str() << "\n";
    write_file_atomic(meta_path(path), meta.str());
}

Ensemble load_ensemble(const std::string& path) {
    FmdsPayload p = read_fmds(path);
    if (p.count == 0) throw IoError("ensemble file has no members: " + path);
    if (p.arity != 1) throw IoError("FMDS file does not hold single states: " + path);
    Ensemble e;
    e.shape = p.shape;
    e.meta.horizon = p.horizon;
    const std::size_t d = p.shape.size();
    e.members.resize(p.count);
    for (std::size_t i = 0; i < p.count; ++i) {
        const double* base = p.values.data() + i * d;
        e.members[i].assign(base, base + d);
    }
    std::error_code ec;
    if (std::filesystem::exists(meta_path(path), ec)) {
        const auto kv = parse_kv(read_file(meta_path(path)));
        auto get = [&](const char* k) {
            auto it = kv.find(k);
            return it == kv.end() ? std::string() : it->second;
        };
        e.meta.source = get("source");
        e.meta.family = get("family");
        e.meta.source_hash = get("source_hash");
        if (auto s = get("seed"); !s.empty()) e.meta.seed = std::stoull(s);
        if (auto s = get("sigma"); !s.empty()) e.meta.sigma = std::stod(s);
        if (auto s = get("steps"); !s.empty()) e.meta.steps = std::stoi(s);
    }
    return e;
}

// --------------------------------------------------------------------------
// CSV / SVG
// --------------------------------------------------------------------------

void export_dataset_csv(const std::string& path, const dynamics::Dataset& ds) {
    std::ostringstream out;
    const std::size_t d = ds.dim();
    for (std::size_t i = 0; i < d; ++i) out << "q0_" << (i + 1) << ",";
    for (std::size_t i = 0; i < d; ++i)
        out << "qT_" << (i + 1) << (i + 1 < d ? "," : "");
    out << "\n";
    for (const auto& pr : ds.pairs) {
        for (std::size_t i = 0; i < d; ++i) out << format_double(pr.q0[i]) << ",";
        for (std::size_t i = 0; i < d; ++i)
            out << format_double(pr.qT[i]) << (i + 1 < d ? "," : "");
        out << "\n";
    }
    write_file_atomic(path, out.str());
}

void export_ensemble_csv(const std::string& path, const Ensemble& e) {
    std::ostringstream out;
    for (std::size_t i = 0; i < e.dim(); ++i)
        out << "y" << (i + 1) << (i + 1 < e.dim() ? "," : "");
    out << "\n";
    for (const auto& m : e.members) {
        for (std::size_t i = 0; i < m.size(); ++i)
            out << format_double(m[i]) << (i + 1 < m.size() ? "," : "");
        out << "\n";
    }
    write_file_atomic(path, out.str());
}

void write_scatter_svg(const std::string& path,
                       const std::vector<ScatterSeries>& series) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (const auto& p : s.points) {
            xmin = std::min(xmin, p[0]);
            xmax = std::max(xmax, p[0]);
            ymin = std::min(ymin, p[1]);
            ymax = std::max(ymax, p[1]);
        }
    if (xmin > xmax) {
        xmin = ymin = 0.0;
        xmax = ymax = 1.0;
    }
    const double pad_x = 0.05 * (xmax - xmin + 1e-12);
    const double pad_y = 0.05 * (ymax - ymin + 1e-12);
    xmin -= pad_x; xmax += pad_x; ymin -= pad_y; ymax += pad_y;

    const int W = 640, H = 480, margin = 48;
    auto sx = [&](double x) {
        return margin + (x - xmin) / (xmax - xmin) * (W - 2 * margin);
    };
    auto sy = [&](double y) {
        return H - margin - (y - ymin) / (ymax - ymin) * (H - 2 * margin);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
        << "\" height=\"" << H << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\""
        << W - 2 * margin << "\" height=\"" << H - 2 * margin
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    int legend_y = margin + 14;
    for (const auto& s : series) {
        for (const auto& p : s.points)
            svg << "<circle cx=\"" << sx(p[0]) << "\" cy=\"" << sy(p[1])
                << "\" r=\"2\" fill=\"" << s.color << "\" fill-opacity=\"0.6\"/>\n";
        svg << "<text x=\"" << W - margin - 150 << "\" y=\"" << legend_y
            << "\" fill=\"" << s.color << "\" font-size=\"13\">" << s.label
            << "</text>\n";
        legend_y += 16;
    }
    svg << "<text x=\"" << margin << "\" y=\"" << H - margin + 28
        << "\" font-size=\"12\">[" << format_double(xmin) << ", "
        << format_double(xmax) << "] x [" << format_double(ymin) << ", "
        << format_double(ymax) << "]</text>\n";
    svg << "</svg>\n";
    write_file_atomic(path, svg.str());
}

}  // namespace flowcast::io
