#include "pixagg/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "pixagg/io.hpp"
#include "pixagg/sampling.hpp"

namespace pixagg {

Tensor SequenceSample::clean_reference() const {
    const int h = clean.dim(1), w = clean.dim(2);
    Tensor r({h, w});
    std::copy(clean.data() + static_cast<std::int64_t>(tau) * h * w,
              clean.data() + static_cast<std::int64_t>(tau + 1) * h * w, r.data());
    return r;
}

Tensor SequenceSample::noisy_reference() const {
    const int h = noisy.dim(1), w = noisy.dim(2);
    Tensor r({h, w});
    std::copy(noisy.data() + static_cast<std::int64_t>(tau) * h * w,
              noisy.data() + static_cast<std::int64_t>(tau + 1) * h * w, r.data());
    return r;
}

Tensor load_image(const std::filesystem::path& path) {
    return read_pgm(path);
}

SequenceSample synthesize_pair(const Tensor& clean_srgb_frames, int tau, const NoiseParams& p,
                               Rng& rng) {
    if (clean_srgb_frames.rank() != 3 || clean_srgb_frames.dim(0) != 2 * tau + 1) {
        throw ShapeError("clean sequence must be [(2*tau+1), h, w]");
    }
    SequenceSample s;
    s.tau = tau;
    s.params = p;
    s.clean = inverse_gamma(clean_srgb_frames);
    s.noisy = add_noise(s.clean, p, rng);
    return s;
}

SequenceSample extract_patches(const SequenceSample& seq, int size, Rng& rng) {
    const int h = seq.clean.dim(1), w = seq.clean.dim(2);
    if (size > h || size > w) {
        throw ShapeError("patch size exceeds frame size");
    }
    const int u0 = static_cast<int>(rng.uniform_int(h - size + 1));
    const int v0 = static_cast<int>(rng.uniform_int(w - size + 1));
    SequenceSample out;
    out.tau = seq.tau;
    out.params = seq.params;
    const int f = seq.frames();
    out.clean = Tensor({f, size, size});
    out.noisy = Tensor({f, size, size});
    for (int k = 0; k < f; ++k) {
        for (int u = 0; u < size; ++u) {
            for (int v = 0; v < size; ++v) {
                out.clean.at(k, u, v) = seq.clean.at(k, u0 + u, v0 + v);
                out.noisy.at(k, u, v) = seq.noisy.at(k, u0 + u, v0 + v);
            }
        }
    }
    return out;
}

namespace {

// Band-limited texture on a canvas: white noise smoothed by repeated box
// blurs at a few scales, mixed with a sinusoidal grating and a soft edge.
Tensor make_texture(int h, int w, Rng& rng) {
    Tensor t = rng.randn({h, w});
    for (int pass = 0; pass < 3; ++pass) {
        Tensor s({h, w});
        for (int u = 0; u < h; ++u) {
            for (int v = 0; v < w; ++v) {
                double acc = 0.0;
                int cnt = 0;
                for (int a = -1; a <= 1; ++a) {
                    for (int b = -1; b <= 1; ++b) {
                        const int uu = u + a, vv = v + b;
                        if (uu >= 0 && uu < h && vv >= 0 && vv < w) {
                            acc += t.at(uu, vv);
                            ++cnt;
                        }
                    }
                }
                s.at(u, v) = static_cast<float>(acc / cnt);
            }
        }
        t = std::move(s);
    }
    // Add structure so the scenes are not pure noise.
    const double fu = rng.uniform(0.05, 0.25);
    const double fv = rng.uniform(0.05, 0.25);
    const double phase = rng.uniform(0.0, 6.28318);
    const double edge_pos = rng.uniform(0.25, 0.75) * w;
    const double edge_width = rng.uniform(2.0, 6.0);
    for (int u = 0; u < h; ++u) {
        for (int v = 0; v < w; ++v) {
            double val = t.at(u, v) * 1.2;
            val += 0.6 * std::sin(fu * u + fv * v + phase);
            val += 0.8 / (1.0 + std::exp(-(v - edge_pos) / edge_width)) - 0.4;
            t.at(u, v) = static_cast<float>(val);
        }
    }
    // Normalize into [0.05, 0.95].
    float lo = t[0], hi = t[0];
    for (std::int64_t i = 0; i < t.size(); ++i) {
        lo = std::min(lo, t[i]);
        hi = std::max(hi, t[i]);
    }
    const float span = std::max(hi - lo, 1e-6f);
    for (std::int64_t i = 0; i < t.size(); ++i) {
        t[i] = 0.05f + 0.9f * (t[i] - lo) / span;
    }
    return t;
}

} // namespace

Tensor generate_clean_sequence(const SequenceSpec& spec, Rng& rng) {
    const int f = spec.frames, h = spec.height, w = spec.width;
    const int tau = (f - 1) / 2;
    const int margin = static_cast<int>(std::ceil(std::abs(spec.shift_px) * tau)) + 2;
    const Tensor canvas = make_texture(h + 2 * margin, w + 2 * margin, rng);

    // Motion direction with L-inf magnitude == shift_px.
    double du = 0.0, dv = 0.0;
    if (spec.shift_px != 0.0) {
        static const int dirs[8][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1},
                                       {1, 1},  {1, -1}, {-1, 1}, {-1, -1}};
        const auto& dir = dirs[rng.uniform_int(8)];
        du = dir[0] * spec.shift_px;
        dv = dir[1] * spec.shift_px;
    }

    Tensor seq({f, h, w});
    for (int k = 0; k < f; ++k) {
        const double su = (k - tau) * du;
        const double sv = (k - tau) * dv;
        for (int u = 0; u < h; ++u) {
            for (int v = 0; v < w; ++v) {
                // The scene moves by (su, sv); sample the canvas at the
                // back-warped position (bilinear for fractional motion).
                seq.at(k, u, v) = static_cast<float>(
                    bilinear_sample(canvas, {u + margin - su, v + margin - sv}));
            }
        }
    }
    return seq;
}

namespace {

std::string seq_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "seq_%04d", i);
    return buf;
}

} // namespace

void write_manifest(const Dataset& ds) {
    std::ofstream os(ds.root / "manifest.txt");
    if (!os) throw IoError("cannot write manifest in " + ds.root.string());
    os << "tau=" << ds.tau << "\n";
    os << "count=" << ds.entries.size() << "\n";
    for (const auto& e : ds.entries) {
        os << e.name << ".sigma_s=" << e.params.sigma_s << "\n";
        os << e.name << ".sigma_r=" << e.params.sigma_r << "\n";
        os << e.name << ".shift=" << e.shift_px << "\n";
    }
}

Dataset read_manifest(const std::filesystem::path& root) {
    std::ifstream is(root / "manifest.txt");
    if (!is) throw IoError("missing manifest.txt in " + root.string());
    Dataset ds;
    ds.root = root;
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw IoError("malformed manifest line " + std::to_string(lineno) + ": " + line);
        }
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    ds.tau = std::stoi(kv.at("tau"));
    const int count = std::stoi(kv.at("count"));
    for (int i = 0; i < count; ++i) {
        DatasetEntry e;
        e.name = seq_name(i);
        e.params.sigma_s = std::stod(kv.at(e.name + ".sigma_s"));
        e.params.sigma_r = std::stod(kv.at(e.name + ".sigma_r"));
        e.shift_px = std::stod(kv.at(e.name + ".shift"));
        ds.entries.push_back(std::move(e));
    }
    return ds;
}

Tensor load_sequence_frames(const std::filesystem::path& dir, const char* ext) {
    std::vector<Tensor> frames;
    for (int k = 0;; ++k) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "frame_%02d.%s", k, ext);
        const auto p = dir / buf;
        if (!std::filesystem::exists(p)) break;
        frames.push_back(std::string(ext) == "pgm" ? read_pgm(p) : read_pxt(p));
    }
    if (frames.empty()) throw IoError("no frames found in " + dir.string());
    const int h = frames[0].dim(0), w = frames[0].dim(1);
    Tensor out({static_cast<int>(frames.size()), h, w});
    for (std::size_t k = 0; k < frames.size(); ++k) {
        if (!frames[k].same_shape(frames[0])) {
            throw ShapeError("inconsistent frame sizes in " + dir.string());
        }
        std::copy(frames[k].data(), frames[k].data() + frames[k].size(),
                  out.data() + static_cast<std::int64_t>(k) * h * w);
    }
    return out;
}

} // namespace pixagg
