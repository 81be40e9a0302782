// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Criteria 6-7 train toy models and take several minutes.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pixagg/aggregation.hpp"
#include "pixagg/data.hpp"
#include "pixagg/loss.hpp"
#include "pixagg/metrics.hpp"
#include "pixagg/model.hpp"
#include "pixagg/nn.hpp"
#include "pixagg/noise.hpp"
#include "pixagg/sampling.hpp"
#include "pixagg/train.hpp"

using namespace pixagg;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
    std::printf("%s: criterion %d (%s)%s%s\n", ok ? "PASS" : "FAIL", idx, name,
                detail.empty() ? "" : " - ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double jitter(Rng& rng, double lo, double hi) {
    for (;;) {
        const double c = rng.uniform(lo, hi);
        const double frac = c - std::floor(c);
        if (frac > 0.05 && frac < 0.95) return c;
    }
}

// ---------------------------------------------------------------------------
// 1. Gradient suite.
// ---------------------------------------------------------------------------
bool check_trilinear_grads(std::string& why) {
    Rng rng(101);
    for (int k = 0; k < 60; ++k) {
        const Tensor x = rng.randn({6, 6, 5});
        const SamplePoint3 p{jitter(rng, 1.0, 4.5), jitter(rng, 1.0, 4.5), jitter(rng, 1.0, 3.5)};
        const SampleGrad3 g = trilinear_backward(x, p, 1.0);
        const double eps = 1e-3;
        const double fds[3] = {
            (trilinear_sample(x, {p.u + eps, p.v, p.t}) -
             trilinear_sample(x, {p.u - eps, p.v, p.t})) / (2 * eps),
            (trilinear_sample(x, {p.u, p.v + eps, p.t}) -
             trilinear_sample(x, {p.u, p.v - eps, p.t})) / (2 * eps),
            (trilinear_sample(x, {p.u, p.v, p.t + eps}) -
             trilinear_sample(x, {p.u, p.v, p.t - eps})) / (2 * eps)};
        const double got[3] = {g.du, g.dv, g.dt};
        for (int a = 0; a < 3; ++a) {
            if (std::abs(got[a] - fds[a]) > 1e-4 * std::max(std::abs(fds[a]), 1.0) + 1e-6) {
                why = "trilinear coordinate gradient mismatch";
                return false;
            }
        }
    }
    return true;
}

bool check_aggregation_grads(std::string& why) {
    Rng rng(102);
    const RigidGrid grid = build_rigid_grid(3, {3, 3, 3});
    for (int k = 0; k < 50; ++k) {
        const Tensor x = rng.randn({6, 6, 5});
        Tensor offsets({6, 6, 27, 3});
        for (std::int64_t i = 0; i < offsets.size(); ++i) {
            offsets[i] = static_cast<float>(rng.uniform(0.1, 0.4));
        }
        const Tensor weights = rng.rand_uniform({6, 6, 27}, -0.5f, 0.5f);
        const Tensor upstream = rng.randn({6, 6});
        const AggregationGrads g = aggregation_backward(x, grid, offsets, weights, upstream);
        const double eps = 1e-3;
        auto objective = [&](const Tensor& off, const Tensor& wt) {
            const Tensor y = aggregate_spatiotemporal(x, grid, off, wt);
            double acc = 0.0;
            for (std::int64_t i = 0; i < y.size(); ++i) {
                acc += static_cast<double>(y[i]) * upstream[i];
            }
            return acc;
        };
        for (int c = 0; c < 2; ++c) {
            const std::int64_t wi = rng.uniform_int(weights.size());
            Tensor lo = weights, hi = weights;
            lo[wi] -= static_cast<float>(eps);
            hi[wi] += static_cast<float>(eps);
            const double fd = (objective(offsets, hi) - objective(offsets, lo)) / (2 * eps);
            if (std::abs(g.grad_weights[wi] - fd) >
                1e-4 * std::max(std::abs(fd), 1.0) + 1e-4) {
                why = "aggregation weight gradient mismatch";
                return false;
            }
            const std::int64_t oi = rng.uniform_int(offsets.size());
            Tensor olo = offsets, ohi = offsets;
            olo[oi] -= static_cast<float>(eps);
            ohi[oi] += static_cast<float>(eps);
            const double fdo = (objective(ohi, weights) - objective(olo, weights)) / (2 * eps);
            if (std::abs(g.grad_offsets[oi] - fdo) >
                2e-4 * std::max(std::abs(fdo), 1.0) + 2e-4) {
                why = "aggregation offset gradient mismatch";
                return false;
            }
        }
    }
    return true;
}

bool check_conv_grads(std::string& why) {
    Rng rng(103);
    for (int k = 0; k < 50; ++k) {
        const Tensor x = rng.randn({1, 4, 4});
        ConvLayer layer(1, 2);
        layer.init(rng);
        const Tensor up = rng.randn({2, 4, 4});
        const ConvGrads g = conv2d_backward(x, layer, up);
        auto objective = [&]() {
            const Tensor y = conv2d_forward(x, layer);
            double acc = 0.0;
            for (std::int64_t i = 0; i < y.size(); ++i) acc += static_cast<double>(y[i]) * up[i];
            return acc;
        };
        const double eps = 1e-3;
        for (int c = 0; c < 3; ++c) {
            const std::int64_t idx = rng.uniform_int(layer.kernel.size());
            const float save = layer.kernel[idx];
            layer.kernel[idx] = save + static_cast<float>(eps);
            const double fhi = objective();
            layer.kernel[idx] = save - static_cast<float>(eps);
            const double flo = objective();
            layer.kernel[idx] = save;
            const double fd = (fhi - flo) / (2 * eps);
            if (std::abs(g.grad_kernel[idx] - fd) > 1e-3 * std::max(std::abs(fd), 1.0)) {
                why = "conv kernel gradient mismatch";
                return false;
            }
        }
    }
    return true;
}

bool check_model_grads(std::string& why) {
    // Weight-branch gradients via a rigid model (smooth path), then
    // end-to-end gradients through the full offset network.
    Model rigid;
    rigid.cfg.dim = 3;
    rigid.cfg.rigid = true;
    rigid.build();
    rigid.init_params(104);
    Model full;
    full.cfg.dim = 3;
    full.build();
    full.init_params(105);

    Rng rng(106);
    const Tensor frames = rng.rand_uniform({5, 16, 16}, 0.1f, 0.9f);
    const Tensor gt = rng.rand_uniform({16, 16}, 0.1f, 0.9f);

    for (Model* mp : {&rigid, &full}) {
        Model& m = *mp;
        auto loss_of = [&]() {
            const ForwardResult f = model_forward(m, frames, nullptr, 0);
            return l1_gamma_loss(f.y, gt);
        };
        const ForwardResult fwd = model_forward(m, frames, nullptr, 0);
        const LossGrad lg = l1_gamma_loss_grad(fwd.y, gt);
        const std::vector<Tensor> grads = model_backward(m, fwd, lg.grad, {});
        std::vector<Tensor*> params = m.parameters();
        Rng pick(107);
        const double eps = 1e-2;
        int checked = 0;
        while (checked < 25) {
            const std::size_t pi = static_cast<std::size_t>(
                pick.uniform_int(static_cast<std::int64_t>(params.size())));
            Tensor& p = *params[pi];
            const std::int64_t idx = pick.uniform_int(p.size());
            const float save = p[idx];
            p[idx] = save + static_cast<float>(eps);
            const double fhi = loss_of();
            p[idx] = save - static_cast<float>(eps);
            const double flo = loss_of();
            p[idx] = save;
            const double fd = (fhi - flo) / (2 * eps);
            if (std::abs(grads[pi][idx] - fd) > 5e-3 * std::max(std::abs(fd), 1.0)) {
                why = mp == &rigid ? "weight-branch gradient mismatch"
                                   : "end-to-end gradient mismatch";
                return false;
            }
            ++checked;
        }
    }
    return true;
}

void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    std::string why;
    const bool ok = check_trilinear_grads(why) && check_aggregation_grads(why) &&
                    check_conv_grads(why) && check_model_grads(why);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s%.1fs", ok ? "all finite-difference checks in " : "",
                  secs);
    report(1, "gradient suite", ok && secs < 120.0, ok ? buf : why);
}

// ---------------------------------------------------------------------------
// 2. Operator identities.
// ---------------------------------------------------------------------------
void criterion2() {
    Rng rng(201);
    bool ok = true;
    std::string why;

    // Zero-offset rigid equivalence vs independent integer-indexed oracle.
    const RigidGrid grid = build_rigid_grid(3, {3, 3, 3});
    const Tensor x = rng.rand_uniform({10, 10, 5}, 0.0f, 1.0f);
    const Tensor offsets({10, 10, 27, 3});
    const Tensor weights = rng.rand_uniform({10, 10, 27}, -0.3f, 0.3f);
    const Tensor y = aggregate_spatiotemporal(x, grid, offsets, weights);
    for (int u = 0; u < 10 && ok; ++u) {
        for (int v = 0; v < 10 && ok; ++v) {
            double acc = 0.0;
            for (int i = 0; i < 27; ++i) {
                const auto& p = grid.points[static_cast<std::size_t>(i)];
                const int uu = u + p[0], vv = v + p[1], tt = 2 + p[2];
                if (uu >= 0 && uu < 10 && vv >= 0 && vv < 10 && tt >= 0 && tt < 5) {
                    acc += static_cast<double>(x.at(uu, vv, tt)) * weights.at(u, v, i);
                }
            }
            if (std::abs(y.at(u, v) - acc) >= 1e-5) {
                ok = false;
                why = "rigid-equivalence max error >= 1e-5";
            }
        }
    }

    // One-hot-center identity, exact.
    if (ok) {
        Tensor onehot({10, 10, 27});
        for (int u = 0; u < 10; ++u) {
            for (int v = 0; v < 10; ++v) onehot.at(u, v, 13) = 1.0f; // (0,0,0)
        }
        const Tensor yid = aggregate_spatiotemporal(x, grid, offsets, onehot);
        for (int u = 0; u < 10 && ok; ++u) {
            for (int v = 0; v < 10 && ok; ++v) {
                if (yid.at(u, v) != x.at(u, v, 2)) {
                    ok = false;
                    why = "one-hot-center identity not exact";
                }
            }
        }
    }

    // Group decomposition sum_g Y_g / s == Y within 1e-5.
    if (ok) {
        const Tensor roff = rng.rand_uniform({10, 10, 27, 3}, -1.5f, 1.5f);
        const Tensor yfull = aggregate_spatiotemporal(x, grid, roff, weights);
        const GroupPartition part(3, 27);
        Tensor sum({10, 10});
        for (int g = 0; g < 3; ++g) {
            const Tensor yg = aggregate_group(x, grid, roff, weights, part, g);
            for (std::int64_t i = 0; i < sum.size(); ++i) sum[i] += yg[i] / 3.0f;
        }
        for (std::int64_t i = 0; i < sum.size() && ok; ++i) {
            if (std::abs(sum[i] - yfull[i]) >= 1e-5) {
                ok = false;
                why = "group decomposition error >= 1e-5";
            }
        }
    }

    // Trilinear integer-coordinate exactness.
    if (ok) {
        for (int k = 0; k < 100 && ok; ++k) {
            const int u = static_cast<int>(rng.uniform_int(10));
            const int v = static_cast<int>(rng.uniform_int(10));
            const int t = static_cast<int>(rng.uniform_int(5));
            if (trilinear_sample(x, {static_cast<double>(u), static_cast<double>(v),
                                     static_cast<double>(t)}) != x.at(u, v, t)) {
                ok = false;
                why = "trilinear integer-coordinate lookup not exact";
            }
        }
    }
    report(2, "operator identities", ok, ok ? "oracle, one-hot, groups, integer lookup" : why);
}

// ---------------------------------------------------------------------------
// 3. Variance reduction (Eq. 1 direction).
// ---------------------------------------------------------------------------
void criterion3() {
    Rng rng(301);
    const double sigma = 0.5;
    const int h = 128, w = 128, n = 9;
    Tensor x = rng.randn({h, w});
    x *= static_cast<float>(sigma);
    const RigidGrid grid = build_rigid_grid(2, {3, 3, 1});
    Tensor offsets({h, w, n, 2});
    for (int u = 0; u < h; ++u) {
        for (int v = 0; v < w; ++v) {
            for (int i = 0; i < n; ++i) {
                // Spread the taps to distinct pixels so draws stay i.i.d.
                offsets.at(u, v, i, 0) =
                    static_cast<float>(2 * grid.points[static_cast<std::size_t>(i)][0]);
                offsets.at(u, v, i, 1) =
                    static_cast<float>(2 * grid.points[static_cast<std::size_t>(i)][1]);
            }
        }
    }
    const Tensor weights = Tensor::full({h, w, n}, 1.0f / n);
    const Tensor y = aggregate_spatial(x, grid, offsets, weights);
    double var = 0.0;
    std::int64_t count = 0;
    for (int u = 6; u < h - 6; ++u) {
        for (int v = 6; v < w - 6; ++v) {
            var += static_cast<double>(y.at(u, v)) * y.at(u, v);
            ++count;
        }
    }
    var /= static_cast<double>(count);
    const double expect = sigma * sigma / n;
    const bool ok = count >= 10000 && std::abs(var - expect) <= 0.10 * expect;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "var %.5f vs sigma^2/9 = %.5f over %lld pixels", var, expect,
                  static_cast<long long>(count));
    report(3, "variance reduction", ok, buf);
}

// ---------------------------------------------------------------------------
// 4. Noise and gamma suite.
// ---------------------------------------------------------------------------
void criterion4() {
    bool ok = true;
    std::string why;

    double max_rt = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double v = i / 1000.0;
        max_rt = std::max(max_rt, std::abs(inverse_gamma_scalar(gamma_correct_scalar(v)) - v));
    }
    if (max_rt >= 1e-6) {
        ok = false;
        why = "gamma round-trip error >= 1e-6";
    }

    const double cut = 0.0031308;
    if (ok && std::abs(12.92 * cut - (1.055 * std::pow(cut, 1.0 / 2.4) - 0.055)) >= 1e-4) {
        ok = false;
        why = "gamma branch gap >= 1e-4";
    }

    if (ok) {
        const NoiseParams p{6.4e-3, 2e-2};
        std::uint64_t seed = 401;
        for (const double q : {0.1, 0.5, 0.9}) {
            const Tensor img = Tensor::full({400, 250}, static_cast<float>(q));
            Rng nrng(seed++);
            const Tensor noisy = add_noise(img, p, nrng);
            double var = 0.0;
            for (std::int64_t i = 0; i < noisy.size(); ++i) {
                const double d = static_cast<double>(noisy[i]) - q;
                var += d * d;
            }
            var /= static_cast<double>(noisy.size());
            const double expect = p.sigma_s * q + p.sigma_r * p.sigma_r;
            if (std::abs(var - expect) > 0.05 * expect) {
                ok = false;
                why = "empirical noise variance off by more than 5%";
                break;
            }
        }
    }

    if (ok) {
        Rng rng(402);
        const Tensor ref = rng.rand_uniform({16, 16}, 0.0f, 1.0f);
        const NoiseParams p{3e-3, 7e-3};
        const Tensor map = estimate_noise_level(ref, p);
        for (std::int64_t i = 0; i < map.size(); ++i) {
            const float want =
                static_cast<float>(std::sqrt(p.sigma_r * p.sigma_r + p.sigma_s * ref[i]));
            if (map[i] != want) {
                ok = false;
                why = "noise-level map not pointwise exact";
                break;
            }
        }
    }
    report(4, "noise/gamma suite", ok,
           ok ? "round-trip, branch gap, empirical variance, noise map" : why);
}

// ---------------------------------------------------------------------------
// 5. Annealing and the video loss.
// ---------------------------------------------------------------------------
void criterion5() {
    const AnnealSchedule s;
    bool ok = anneal_coeff(s, 0) == 100.0 && std::abs(anneal_coeff(s, 3466) - 50.0) <= 0.1 &&
              anneal_coeff(s, 200000) < 1e-13;
    std::string why = ok ? "" : "annealing coefficient values off";
    if (ok) {
        double prev = anneal_coeff(s, 0);
        for (int m = 1; m <= 5000; ++m) {
            const double c = anneal_coeff(s, m);
            if (c >= prev) {
                ok = false;
                why = "annealing coefficient not strictly decreasing";
                break;
            }
            prev = c;
        }
    }
    if (ok) {
        Rng rng(501);
        const Tensor gt = rng.rand_uniform({8, 8}, 0.0f, 1.0f);
        const Tensor y = rng.rand_uniform({8, 8}, 0.0f, 1.0f);
        std::vector<Tensor> groups;
        for (int g = 0; g < 3; ++g) groups.push_back(rng.rand_uniform({8, 8}, 0.0f, 1.0f));
        const std::int64_t m = 777;
        double hand = l1_gamma_loss(y, gt);
        for (const Tensor& g : groups) hand += anneal_coeff(s, m) * l1_gamma_loss(g, gt);
        if (std::abs(video_loss(y, groups, gt, s, m, 3) - hand) >= 1e-6) {
            ok = false;
            why = "video loss differs from the hand-computed 4-term sum";
        }
    }
    report(5, "annealing and video loss", ok, ok ? "100.0 / ~50.0 / vanishing; 4-term sum" : why);
}

// ---------------------------------------------------------------------------
// 6 + 7. Toy training and the misalignment study (shared models).
// ---------------------------------------------------------------------------
struct EvalSummary {
    double noisy = 0.0;
    double avg = 0.0;
    double model = 0.0;
};

EvalSummary summarize(const Model& m, const Dataset& ds) {
    const auto rows = evaluate_dataset(m, ds, "model");
    EvalSummary s;
    s.noisy = mean_of(rows, "noisy_ref").psnr;
    s.avg = mean_of(rows, "direct_avg").psnr;
    s.model = mean_of(rows, "model").psnr;
    return s;
}

void criterion67(const fs::path& work) {
    const auto t0 = std::chrono::steady_clock::now();
    const double sigma_r = 25.0 / 255.0;

    // Shared toy dataset: random integer shifts 0..6 so one model covers
    // every misalignment bucket.
    SynthConfig sc;
    sc.out = work / "train_ds";
    sc.count = 8;
    sc.tau = 2;
    sc.size = 48;
    sc.seed = 71;
    sc.sigma_s = 0.0;
    sc.sigma_r = sigma_r;
    sc.shift = -1.0;
    synthesize_dataset(sc);

    TrainConfig tc;
    tc.mode = "stpan";
    tc.data_root = sc.out;
    tc.out_dir = work / "run_stpan";
    tc.iters = 1500;
    tc.batch = 2;
    tc.patch = 32;
    tc.seed = 5;
    tc.sigma_s = 0.0;
    tc.sigma_r = sigma_r;
    const TrainResult stpan = train(tc);

    tc.mode = "rigid";
    tc.out_dir = work / "run_rigid";
    const TrainResult rigid = train(tc);

    // Held-out sets, one per controlled shift.
    EvalSummary stpan_by_shift[4];
    EvalSummary rigid_by_shift[4];
    const int shifts[4] = {0, 2, 4, 6};
    for (int i = 0; i < 4; ++i) {
        SynthConfig hc = sc;
        hc.out = work / ("held_" + std::to_string(shifts[i]));
        hc.count = 4;
        hc.seed = 900 + static_cast<std::uint64_t>(shifts[i]);
        hc.shift = shifts[i];
        synthesize_dataset(hc);
        const Dataset ds = read_manifest(hc.out);
        stpan_by_shift[i] = summarize(stpan.model, ds);
        rigid_by_shift[i] = summarize(rigid.model, ds);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // Criterion 6: >= +3 dB over the noisy reference everywhere, and above
    // direct averaging wherever inter-frame motion is >= 3 px.
    double min_gain = 1e9;
    for (int i = 0; i < 4; ++i) {
        min_gain = std::min(min_gain, stpan_by_shift[i].model - stpan_by_shift[i].noisy);
    }
    const bool beats_avg = stpan_by_shift[2].model > stpan_by_shift[2].avg &&
                           stpan_by_shift[3].model > stpan_by_shift[3].avg;
    char buf6[192];
    std::snprintf(buf6, sizeof(buf6),
                  "min gain over noisy %.2f dB; shift4 model %.2f vs avg %.2f dB; %.0fs total",
                  min_gain, stpan_by_shift[2].model, stpan_by_shift[2].avg, secs);
    report(6, "toy training", min_gain >= 3.0 && beats_avg && secs < 1800.0, buf6);

    // Criterion 7a: oracle offsets undo integer shifts on noiseless stacks.
    bool oracle_ok = true;
    {
        Rng rng(701);
        const int h = 24, w = 24, f = 5, su = 4, sv = 0;
        const Tensor canvas = rng.rand_uniform({h + 40, w + 40}, 0.0f, 1.0f);
        Tensor stackv({h, w, f});
        for (int k = 0; k < f; ++k) {
            for (int u = 0; u < h; ++u) {
                for (int v = 0; v < w; ++v) {
                    stackv.at(u, v, k) = canvas.at(20 + u - (k - 2) * su, 20 + v - (k - 2) * sv);
                }
            }
        }
        const RigidGrid grid = build_rigid_grid(3, {3, 3, 3});
        Tensor offsets({h, w, 27, 3});
        for (int u = 0; u < h; ++u) {
            for (int v = 0; v < w; ++v) {
                for (int i = 0; i < 27; ++i) {
                    const auto& p = grid.points[static_cast<std::size_t>(i)];
                    offsets.at(u, v, i, 0) = static_cast<float>((p[2]) * su - p[0]);
                    offsets.at(u, v, i, 1) = static_cast<float>((p[2]) * sv - p[1]);
                }
            }
        }
        const Tensor weights = Tensor::full({h, w, 27}, 1.0f / 27.0f);
        const Tensor y = aggregate_spatiotemporal(stackv, grid, offsets, weights);
        const int m = 2 * su + 2;
        for (int u = m; u < h - m && oracle_ok; ++u) {
            for (int v = m; v < w - m && oracle_ok; ++v) {
                if (std::abs(y.at(u, v) - canvas.at(20 + u, 20 + v)) >= 1e-5) oracle_ok = false;
            }
        }
    }

    // Criterion 7b: learned offsets beat the rigid grid once misalignment
    // exceeds its reach.
    const double adv0 = stpan_by_shift[0].model - rigid_by_shift[0].model;
    const double adv4 = stpan_by_shift[2].model - rigid_by_shift[2].model;
    const double adv6 = stpan_by_shift[3].model - rigid_by_shift[3].model;
    const bool ok7 = oracle_ok && adv4 > 0.0 && adv6 > 0.0;
    char buf7[192];
    std::snprintf(buf7, sizeof(buf7),
                  "oracle %s; stpan-rigid advantage %.2f / %.2f / %.2f dB at shift 0/4/6",
                  oracle_ok ? "ok" : "FAILED", adv0, adv4, adv6);
    report(7, "misalignment study", ok7, buf7);
}

// ---------------------------------------------------------------------------
// 8. Determinism.
// ---------------------------------------------------------------------------
std::vector<char> slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

bool identical_trees(const fs::path& a, const fs::path& b) {
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), a);
        if (slurp(entry.path()) != slurp(b / rel)) return false;
    }
    return true;
}

void criterion8(const fs::path& work) {
    SynthConfig sc;
    sc.count = 4;
    sc.tau = 2;
    sc.size = 32;
    sc.seed = 88;
    sc.shift = 2.0;
    sc.out = work / "det_a";
    synthesize_dataset(sc);
    sc.out = work / "det_b";
    synthesize_dataset(sc);
    const bool data_ok = identical_trees(work / "det_a", work / "det_b");

    TrainConfig tc;
    tc.mode = "stpan";
    tc.data_root = work / "det_a";
    tc.iters = 100;
    tc.batch = 1;
    tc.patch = 16;
    tc.seed = 9;
    tc.out_dir = work / "det_run_a";
    train(tc);
    tc.out_dir = work / "det_run_b";
    train(tc);
    const bool log_ok =
        slurp(work / "det_run_a" / "loss_log.csv") == slurp(work / "det_run_b" / "loss_log.csv");
    const bool ckpt_ok = slurp(work / "det_run_a" / "checkpoint.pxc") ==
                         slurp(work / "det_run_b" / "checkpoint.pxc");

    const bool ok = data_ok && log_ok && ckpt_ok;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "dataset %s, loss log %s, checkpoint %s",
                  data_ok ? "identical" : "DIFFERS", log_ok ? "identical" : "DIFFERS",
                  ckpt_ok ? "identical" : "DIFFERS");
    report(8, "determinism", ok, buf);
}

} // namespace

int main() {
    const fs::path work = fs::temp_directory_path() / "pixagg_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);

    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion67(work);
    criterion8(work);

    fs::remove_all(work);
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
