#include "pixagg/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace pixagg {

namespace {

// Reference channel plan for the offset network (C1..C27); the last
// entry is replaced by n*d (or 1 for the direct-synthesis head).
constexpr int kOffsetPlan[27] = {64,  64,  64,  128, 128, 128, 256, 256, 256,
                                 512, 512, 512, 512, 512, 512, 512, 512, 512,
                                 256, 256, 256, 128, 128, 128, 128, 128, 0};

} // namespace

int ModelConfig::ch(int base) const {
    return std::max(1, static_cast<int>(std::lround(base * width_mult)));
}

void Model::build() {
    if (cfg.dim != 2 && cfg.dim != 3) throw GridError("model dim must be 2 or 3");
    grid = build_rigid_grid(cfg.dim, cfg.dim == 2
                                         ? std::array<int, 3>{cfg.grid_extents[0], cfg.grid_extents[1], 1}
                                         : cfg.grid_extents);
    offset_layers.clear();
    weight_layers.clear();

    int prev = cfg.in_channels();
    for (int i = 0; i < 27; ++i) {
        int out = i == 26 ? (cfg.direct ? 1 : grid.n() * cfg.dim) : cfg.ch(kOffsetPlan[i]);
        offset_layers.emplace_back(prev, out);
        prev = out;
    }
    if (!cfg.direct && !cfg.fixed_weights) {
        int in = cfg.in_channels() + cfg.ch(128);
        if (cfg.concat_sampled) in += grid.n();
        weight_layers.emplace_back(in, cfg.ch(64));
        weight_layers.emplace_back(cfg.ch(64), cfg.ch(64));
        weight_layers.emplace_back(cfg.ch(64), grid.n());
    }
}

void Model::init_params(std::uint64_t seed) {
    Rng rng(seed);
    for (auto& l : offset_layers) l.init(rng);
    for (auto& l : weight_layers) l.init(rng);
}

std::vector<Tensor*> Model::parameters() {
    std::vector<Tensor*> out;
    for (auto& l : offset_layers) {
        out.push_back(&l.kernel);
        out.push_back(&l.bias);
    }
    for (auto& l : weight_layers) {
        out.push_back(&l.kernel);
        out.push_back(&l.bias);
    }
    return out;
}

std::vector<const Tensor*> Model::parameters() const {
    std::vector<const Tensor*> out;
    for (const auto& l : offset_layers) {
        out.push_back(&l.kernel);
        out.push_back(&l.bias);
    }
    for (const auto& l : weight_layers) {
        out.push_back(&l.kernel);
        out.push_back(&l.bias);
    }
    return out;
}

namespace {

Tensor run_chain(const Model& m, int lo, int hi, Tensor x, std::vector<LayerCache>& cache) {
    for (int i = lo; i <= hi; ++i) {
        Tensor pre = conv2d_forward(x, m.offset_layers[static_cast<std::size_t>(i)]);
        cache[static_cast<std::size_t>(i)].input = std::move(x);
        x = relu_forward(pre);
        cache[static_cast<std::size_t>(i)].preact = std::move(pre);
    }
    return x;
}

Tensor back_chain(const Model& m, int lo, int hi, Tensor grad_out,
                  const std::vector<LayerCache>& cache, std::vector<Tensor>& grads) {
    for (int i = hi; i >= lo; --i) {
        const auto& lc = cache[static_cast<std::size_t>(i)];
        Tensor gpre = relu_backward(lc.preact, grad_out);
        ConvGrads cg = conv2d_backward(lc.input, m.offset_layers[static_cast<std::size_t>(i)], gpre);
        grads[static_cast<std::size_t>(2 * i)] += cg.grad_kernel;
        grads[static_cast<std::size_t>(2 * i + 1)] += cg.grad_bias;
        grad_out = std::move(cg.grad_x);
    }
    return grad_out;
}

// Skip connection: encoder features summed into the leading channels of
// the upsampled decoder map (same resolution; decoder is wider).
void skip_add(Tensor& dst, const Tensor& enc) {
    if (enc.dim(0) > dst.dim(0) || enc.dim(1) != dst.dim(1) || enc.dim(2) != dst.dim(2)) {
        throw ShapeError("skip connection shape mismatch");
    }
    for (std::int64_t i = 0; i < enc.size(); ++i) dst[i] += enc[i];
}

void skip_add_backward(const Tensor& grad_dst, Tensor& grad_enc) {
    for (std::int64_t i = 0; i < grad_enc.size(); ++i) grad_enc[i] += grad_dst[i];
}

Tensor frames_to_volume(const Tensor& frames, int dim) {
    const int f = frames.dim(0), h = frames.dim(1), w = frames.dim(2);
    if (dim == 2) {
        Tensor v({h, w});
        std::copy(frames.data(), frames.data() + v.size(), v.data());
        return v;
    }
    Tensor v({h, w, f});
    for (int k = 0; k < f; ++k) {
        for (int u = 0; u < h; ++u) {
            for (int vv = 0; vv < w; ++vv) v.at(u, vv, k) = frames.at(k, u, vv);
        }
    }
    return v;
}

} // namespace

ForwardResult model_forward(const Model& m, const Tensor& frames, const Tensor* noise_map,
                            int groups) {
    const ModelConfig& cfg = m.cfg;
    if (frames.rank() != 3 || frames.dim(0) != cfg.frames()) {
        throw ShapeError("model input must be [frames, h, w] with the configured frame count");
    }
    const int h = frames.dim(1), w = frames.dim(2);
    if (h % ModelConfig::kDepthFactor != 0 || w % ModelConfig::kDepthFactor != 0) {
        throw ShapeError("input resolution must be divisible by " +
                         std::to_string(ModelConfig::kDepthFactor));
    }
    if (!cfg.blind && noise_map == nullptr) {
        throw ConfigError("non-blind model requires a noise-level map");
    }

    ForwardResult r;
    ForwardCache& c = r.cache;
    c.off.resize(27);

    Tensor nm3;
    Tensor input;
    if (!cfg.blind) {
        if (noise_map->rank() != 2 || noise_map->dim(0) != h || noise_map->dim(1) != w) {
            throw ShapeError("noise map shape mismatch");
        }
        nm3 = Tensor({1, h, w});
        std::copy(noise_map->data(), noise_map->data() + noise_map->size(), nm3.data());
        input = concat_channels({&frames, &nm3});
    } else {
        input = frames;
    }

    // Encoder.
    c.e1 = run_chain(m, 0, 2, std::move(input), c.off);
    Tensor x = avgpool2_forward(c.e1);
    c.e2 = run_chain(m, 3, 5, std::move(x), c.off);
    x = avgpool2_forward(c.e2);
    c.e3 = run_chain(m, 6, 8, std::move(x), c.off);
    x = avgpool2_forward(c.e3);
    // Bottleneck.
    x = run_chain(m, 9, 14, std::move(x), c.off);
    // Decoder with summation skips.
    x = upsample2_forward(x);
    skip_add(x, c.e3);
    x = run_chain(m, 15, 17, std::move(x), c.off);
    x = upsample2_forward(x);
    skip_add(x, c.e2);
    x = run_chain(m, 18, 20, std::move(x), c.off);
    x = upsample2_forward(x);
    skip_add(x, c.e1);
    x = run_chain(m, 21, 25, std::move(x), c.off);
    r.features = x; // C26 output (post-ReLU)

    // Head: C27.
    Tensor raw = conv2d_forward(x, m.offset_layers[26]);
    c.off[26].input = std::move(x);

    if (cfg.direct) {
        r.y = Tensor({h, w});
        std::copy(raw.data(), raw.data() + r.y.size(), r.y.data());
        c.off[26].preact = std::move(raw);
        return r;
    }

    const int n = m.grid.n();
    const int d = cfg.dim;
    c.toff = tanh_forward(raw);
    c.off[26].preact = std::move(raw);

    r.offsets = Tensor({h, w, n, d});
    if (!cfg.rigid) {
        for (int i = 0; i < n; ++i) {
            for (int a = 0; a < d; ++a) {
                const double scale = a < 2 ? cfg.offset_scale : static_cast<double>(cfg.tau);
                for (int u = 0; u < h; ++u) {
                    for (int v = 0; v < w; ++v) {
                        r.offsets.at(u, v, i, a) =
                            static_cast<float>(scale * c.toff.at(i * d + a, u, v));
                    }
                }
            }
        }
    }

    c.volume = frames_to_volume(frames, cfg.dim);
    c.stack = sample_stack(c.volume, m.grid, r.offsets);

    if (cfg.fixed_weights) {
        r.weights = Tensor::full({h, w, n}, 1.0f / static_cast<float>(n));
    } else {
        std::vector<const Tensor*> parts;
        if (cfg.concat_sampled) parts.push_back(&c.stack);
        parts.push_back(&frames);
        if (!cfg.blind) parts.push_back(&nm3);
        parts.push_back(&r.features);
        c.wb_input = concat_channels(parts);

        c.wb.resize(3);
        Tensor wx = c.wb_input;
        for (int i = 0; i < 3; ++i) {
            Tensor pre = conv2d_forward(wx, m.weight_layers[static_cast<std::size_t>(i)]);
            c.wb[static_cast<std::size_t>(i)].input = std::move(wx);
            wx = i < 2 ? relu_forward(pre) : pre; // last layer is linear
            c.wb[static_cast<std::size_t>(i)].preact = std::move(pre);
        }
        r.weights = Tensor({h, w, n});
        for (int i = 0; i < n; ++i) {
            for (int u = 0; u < h; ++u) {
                for (int v = 0; v < w; ++v) r.weights.at(u, v, i) = wx.at(i, u, v);
            }
        }
    }

    r.y = aggregate_stack(c.stack, r.weights);
    if (groups > 0) {
        GroupPartition part(groups, n);
        r.y_groups.reserve(static_cast<std::size_t>(groups));
        for (int g = 0; g < groups; ++g) {
            r.y_groups.push_back(aggregate_stack_group(c.stack, r.weights, part, g));
        }
    }
    return r;
}

std::vector<Tensor> model_backward(const Model& m, const ForwardResult& fwd,
                                   const Tensor& grad_y,
                                   const std::vector<Tensor>& grad_groups) {
    const ModelConfig& cfg = m.cfg;
    const ForwardCache& c = fwd.cache;
    const int h = grad_y.dim(0), w = grad_y.dim(1);

    std::vector<Tensor> grads;
    {
        const auto params = m.parameters();
        grads.reserve(params.size());
        for (const Tensor* p : params) grads.emplace_back(p->shape());
    }

    if (cfg.direct) {
        Tensor up({1, h, w});
        std::copy(grad_y.data(), grad_y.data() + grad_y.size(), up.data());
        ConvGrads cg = conv2d_backward(c.off[26].input, m.offset_layers[26], up);
        grads[52] += cg.grad_kernel;
        grads[53] += cg.grad_bias;
        Tensor gx = back_chain(m, 21, 25, std::move(cg.grad_x), c.off, grads);
        // Continue through the U-Net (shared with the standard path below).
        Tensor g_e1(c.e1.shape());
        skip_add_backward(gx, g_e1);
        gx = upsample2_backward(gx);
        gx = back_chain(m, 18, 20, std::move(gx), c.off, grads);
        Tensor g_e2(c.e2.shape());
        skip_add_backward(gx, g_e2);
        gx = upsample2_backward(gx);
        gx = back_chain(m, 15, 17, std::move(gx), c.off, grads);
        Tensor g_e3(c.e3.shape());
        skip_add_backward(gx, g_e3);
        gx = upsample2_backward(gx);
        gx = back_chain(m, 9, 14, std::move(gx), c.off, grads);
        g_e3 += avgpool2_backward(gx);
        gx = back_chain(m, 6, 8, std::move(g_e3), c.off, grads);
        g_e2 += avgpool2_backward(gx);
        gx = back_chain(m, 3, 5, std::move(g_e2), c.off, grads);
        g_e1 += avgpool2_backward(gx);
        back_chain(m, 0, 2, std::move(g_e1), c.off, grads);
        return grads;
    }

    const int n = m.grid.n();
    const int d = cfg.dim;

    // Gradients wrt the sampled stack and the weights from the weighted
    // sums (main output plus group outputs).
    Tensor grad_stack({n, h, w});
    Tensor grad_weights({h, w, n});
    for (int u = 0; u < h; ++u) {
        for (int v = 0; v < w; ++v) {
            const float gy = grad_y.at(u, v);
            for (int i = 0; i < n; ++i) {
                grad_stack.at(i, u, v) = gy * fwd.weights.at(u, v, i);
                grad_weights.at(u, v, i) = gy * c.stack.at(i, u, v);
            }
        }
    }
    if (!grad_groups.empty()) {
        GroupPartition part(static_cast<int>(grad_groups.size()), n);
        for (int g = 0; g < part.s; ++g) {
            const Tensor& gg = grad_groups[static_cast<std::size_t>(g)];
            const int lo = g * part.group_size(), hi = lo + part.group_size();
            for (int u = 0; u < h; ++u) {
                for (int v = 0; v < w; ++v) {
                    const float up = gg.at(u, v) * static_cast<float>(part.s);
                    if (up == 0.0f) continue;
                    for (int i = lo; i < hi; ++i) {
                        grad_stack.at(i, u, v) += up * fwd.weights.at(u, v, i);
                        grad_weights.at(u, v, i) += up * c.stack.at(i, u, v);
                    }
                }
            }
        }
    }

    // Weight branch backward; feeds gradients into the sampled stack
    // (concat input) and the last offset-net features.
    Tensor grad_features(fwd.features.shape());
    const std::size_t wb_base = 27 * 2;
    if (!cfg.fixed_weights) {
        Tensor gwb({n, h, w});
        for (int i = 0; i < n; ++i) {
            for (int u = 0; u < h; ++u) {
                for (int v = 0; v < w; ++v) gwb.at(i, u, v) = grad_weights.at(u, v, i);
            }
        }
        for (int i = 2; i >= 0; --i) {
            const auto& lc = c.wb[static_cast<std::size_t>(i)];
            Tensor gpre = i < 2 ? relu_backward(lc.preact, gwb) : std::move(gwb);
            ConvGrads cg = conv2d_backward(lc.input, m.weight_layers[static_cast<std::size_t>(i)], gpre);
            grads[wb_base + static_cast<std::size_t>(2 * i)] += cg.grad_kernel;
            grads[wb_base + static_cast<std::size_t>(2 * i) + 1] += cg.grad_bias;
            gwb = std::move(cg.grad_x);
        }
        // Split the concat gradient.
        std::int64_t off = 0;
        const std::int64_t plane = static_cast<std::int64_t>(h) * w;
        if (cfg.concat_sampled) {
            for (std::int64_t i = 0; i < grad_stack.size(); ++i) grad_stack[i] += gwb[off + i];
            off += grad_stack.size();
        }
        off += static_cast<std::int64_t>(cfg.frames()) * plane; // input frames: no parameters upstream
        if (!cfg.blind) off += plane;
        for (std::int64_t i = 0; i < grad_features.size(); ++i) grad_features[i] = gwb[off + i];
    }

    // Stack backward: source gradient is discarded (network input),
    // offset gradient continues into the Tanh head unless rigid.
    Tensor grad_head; // gradient on C26 output
    {
        SampleStackGrads sg = sample_stack_backward(c.volume, m.grid, fwd.offsets, grad_stack);
        if (!cfg.rigid) {
            Tensor grad_toff({n * d, h, w});
            for (int i = 0; i < n; ++i) {
                for (int a = 0; a < d; ++a) {
                    const double scale = a < 2 ? cfg.offset_scale : static_cast<double>(cfg.tau);
                    for (int u = 0; u < h; ++u) {
                        for (int v = 0; v < w; ++v) {
                            grad_toff.at(i * d + a, u, v) =
                                static_cast<float>(scale * sg.grad_offsets.at(u, v, i, a));
                        }
                    }
                }
            }
            Tensor graw = tanh_backward(c.toff, grad_toff);
            ConvGrads cg = conv2d_backward(c.off[26].input, m.offset_layers[26], graw);
            grads[52] += cg.grad_kernel;
            grads[53] += cg.grad_bias;
            grad_head = std::move(cg.grad_x);
            grad_head += grad_features;
        } else {
            grad_head = std::move(grad_features);
        }
    }

    // Back through the U-Net body.
    Tensor gx = back_chain(m, 21, 25, std::move(grad_head), c.off, grads);
    Tensor g_e1(c.e1.shape());
    skip_add_backward(gx, g_e1);
    gx = upsample2_backward(gx);
    gx = back_chain(m, 18, 20, std::move(gx), c.off, grads);
    Tensor g_e2(c.e2.shape());
    skip_add_backward(gx, g_e2);
    gx = upsample2_backward(gx);
    gx = back_chain(m, 15, 17, std::move(gx), c.off, grads);
    Tensor g_e3(c.e3.shape());
    skip_add_backward(gx, g_e3);
    gx = upsample2_backward(gx);
    gx = back_chain(m, 9, 14, std::move(gx), c.off, grads);
    g_e3 += avgpool2_backward(gx);
    gx = back_chain(m, 6, 8, std::move(g_e3), c.off, grads);
    g_e2 += avgpool2_backward(gx);
    gx = back_chain(m, 3, 5, std::move(g_e2), c.off, grads);
    g_e1 += avgpool2_backward(gx);
    back_chain(m, 0, 2, std::move(g_e1), c.off, grads);
    return grads;
}

namespace {

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated checkpoint");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) os.put(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double read_f64(std::istream& is) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        const int c = is.get();
        if (c == EOF) throw IoError("truncated checkpoint");
        bits |= static_cast<std::uint64_t>(c & 0xff) << (8 * i);
    }
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void write_tensor(std::ostream& os, const Tensor& t) {
    os.write("PXT1", 4);
    write_u32(os, static_cast<std::uint32_t>(t.rank()));
    for (int d : t.shape()) write_u32(os, static_cast<std::uint32_t>(d));
    os.write(reinterpret_cast<const char*>(t.data()), t.size() * 4);
}

Tensor read_tensor(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "PXT1", 4) != 0) {
        throw IoError("bad tensor framing in checkpoint");
    }
    const std::uint32_t rank = read_u32(is);
    std::vector<int> shape(rank);
    std::int64_t size = 1;
    for (auto& d : shape) {
        d = static_cast<int>(read_u32(is));
        size *= d;
    }
    std::vector<float> data(static_cast<std::size_t>(size));
    if (!is.read(reinterpret_cast<char*>(data.data()), size * 4)) {
        throw IoError("truncated tensor in checkpoint");
    }
    return Tensor::from_values(std::move(shape), std::move(data));
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& m, std::int64_t iteration) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os.write("PXC1", 4);
    const ModelConfig& c = m.cfg;
    write_f64(os, c.width_mult);
    write_u32(os, static_cast<std::uint32_t>(c.dim));
    write_u32(os, static_cast<std::uint32_t>(c.tau));
    for (int e : c.grid_extents) write_u32(os, static_cast<std::uint32_t>(e));
    os.put(c.blind ? 1 : 0);
    write_f64(os, c.offset_scale);
    os.put(c.rigid ? 1 : 0);
    os.put(c.fixed_weights ? 1 : 0);
    os.put(c.direct ? 1 : 0);
    os.put(c.concat_sampled ? 1 : 0);
    write_f64(os, static_cast<double>(iteration));
    const auto params = m.parameters();
    write_u32(os, static_cast<std::uint32_t>(params.size()));
    for (const Tensor* p : params) write_tensor(os, *p);
    if (!os) throw IoError("checkpoint write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "PXC1", 4) != 0) {
        throw IoError("bad checkpoint magic in " + path.string());
    }
    Checkpoint ck;
    ModelConfig& c = ck.model.cfg;
    c.width_mult = read_f64(is);
    c.dim = static_cast<int>(read_u32(is));
    c.tau = static_cast<int>(read_u32(is));
    for (int& e : c.grid_extents) e = static_cast<int>(read_u32(is));
    c.blind = is.get() != 0;
    c.offset_scale = read_f64(is);
    c.rigid = is.get() != 0;
    c.fixed_weights = is.get() != 0;
    c.direct = is.get() != 0;
    c.concat_sampled = is.get() != 0;
    ck.iteration = static_cast<std::int64_t>(read_f64(is));
    ck.model.build();
    auto params = ck.model.parameters();
    const std::uint32_t count = read_u32(is);
    if (count != params.size()) throw IoError("checkpoint parameter count mismatch");
    for (Tensor* p : params) {
        Tensor t = read_tensor(is);
        if (!t.same_shape(*p)) throw IoError("checkpoint parameter shape mismatch");
        *p = std::move(t);
    }
    return ck;
}

} // namespace pixagg
