#include "pixagg/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace pixagg {

namespace {

void write_u32le(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32le(std::istream& is, const std::string& what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) {
        throw IoError("truncated file while reading " + what);
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

void write_pxt(const std::filesystem::path& path, const Tensor& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os.write("PXT1", 4);
    write_u32le(os, static_cast<std::uint32_t>(t.rank()));
    for (int d : t.shape()) write_u32le(os, static_cast<std::uint32_t>(d));
    static_assert(sizeof(float) == 4);
    // Assumes little-endian host, as does the rest of the toolchain.
    os.write(reinterpret_cast<const char*>(t.data()), t.size() * 4);
    if (!os) throw IoError("write failed: " + path.string());
}

Tensor read_pxt(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "PXT1", 4) != 0) {
        throw IoError("bad PXT1 magic in " + path.string());
    }
    const std::uint32_t rank = read_u32le(is, "rank");
    if (rank == 0 || rank > 8) throw IoError("unreasonable tensor rank in " + path.string());
    std::vector<int> shape(rank);
    std::int64_t n = 1;
    for (auto& d : shape) {
        d = static_cast<int>(read_u32le(is, "dimension"));
        if (d < 1) throw IoError("invalid dimension in " + path.string());
        n *= d;
    }
    std::vector<float> data(static_cast<std::size_t>(n));
    if (!is.read(reinterpret_cast<char*>(data.data()), n * 4)) {
        throw IoError("truncated payload in " + path.string());
    }
    return Tensor::from_values(std::move(shape), std::move(data));
}

namespace {

// Reads one whitespace-delimited PGM header token, skipping '#' comments.
// Reports the byte offset of the failure for parse errors.
std::string next_token(std::istream& is, const std::filesystem::path& path) {
    int c = is.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = is.get();
        } else if (!std::isspace(c)) {
            break;
        } else {
            c = is.get();
        }
    }
    if (c == EOF) {
        throw IoError("unexpected end of header at byte offset " +
                      std::to_string(is.tellg() == -1 ? 0 : static_cast<long long>(is.tellg())) +
                      " in " + path.string());
    }
    std::string tok;
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = is.get();
    }
    return tok;
}

int parse_int_token(std::istream& is, const std::filesystem::path& path, const char* what) {
    const auto pos = is.tellg();
    const std::string tok = next_token(is, path);
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        throw IoError(std::string("cannot parse ") + what + " near byte offset " +
                      std::to_string(static_cast<long long>(pos)) + " in " + path.string());
    }
}

} // namespace

void write_pgm(const std::filesystem::path& path, const Tensor& image, int maxval) {
    if (image.rank() != 2) throw ShapeError("pgm writer expects a 2D image");
    if (maxval != 255 && maxval != 65535) throw IoError("pgm maxval must be 255 or 65535");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << "P5\n" << image.dim(1) << " " << image.dim(0) << "\n" << maxval << "\n";
    for (std::int64_t i = 0; i < image.size(); ++i) {
        const double v = std::clamp(static_cast<double>(image[i]), 0.0, 1.0);
        const int q = static_cast<int>(std::lround(v * maxval));
        if (maxval == 255) {
            os.put(static_cast<char>(q));
        } else {
            os.put(static_cast<char>(q >> 8)); // big-endian per PGM spec
            os.put(static_cast<char>(q & 0xff));
        }
    }
    if (!os) throw IoError("write failed: " + path.string());
}

Tensor read_pgm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    const std::string magic = next_token(is, path);
    if (magic != "P5") {
        throw IoError("bad PGM magic '" + magic + "' at byte offset 0 in " + path.string());
    }
    const int w = parse_int_token(is, path, "width");
    const int h = parse_int_token(is, path, "height");
    const int maxval = parse_int_token(is, path, "maxval");
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) {
        throw IoError("invalid PGM dimensions/maxval in " + path.string());
    }
    // Exactly one whitespace byte separates the header from the payload;
    // next_token consumed it already.
    Tensor img({h, w});
    const bool wide = maxval > 255;
    for (std::int64_t i = 0; i < img.size(); ++i) {
        int v;
        if (wide) {
            const int hi = is.get();
            const int lo = is.get();
            if (lo == EOF) throw IoError("truncated PGM payload in " + path.string());
            v = (hi << 8) | lo;
        } else {
            v = is.get();
            if (v == EOF) throw IoError("truncated PGM payload in " + path.string());
        }
        img[i] = static_cast<float>(static_cast<double>(v) / maxval);
    }
    return img;
}

} // namespace pixagg
