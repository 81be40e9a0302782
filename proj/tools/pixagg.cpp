#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "pixagg/io.hpp"
#include "pixagg/metrics.hpp"
#include "pixagg/parallel.hpp"
#include "pixagg/train.hpp"

namespace fs = std::filesystem;
using namespace pixagg;

namespace {

void cmd_denoise(const std::string& ckpt_path, const std::string& input_dir,
                 const std::string& out_prefix, double sigma_s, double sigma_r) {
    const Checkpoint ck = load_checkpoint(ckpt_path);
    const fs::path in(input_dir);
    Tensor noisy;
    if (fs::exists(in / "frame_00.pxt")) {
        noisy = load_sequence_frames(in, "pxt");
    } else if (fs::exists(in / "frame_00.pgm")) {
        // Clean sRGB frames: linearize, no noise added.
        noisy = inverse_gamma(load_sequence_frames(in, "pgm"));
    } else {
        throw IoError("no frame_00.pxt or frame_00.pgm in " + input_dir);
    }
    std::optional<NoiseParams> np;
    if (sigma_s >= 0.0 || sigma_r >= 0.0) {
        np = NoiseParams{std::max(sigma_s, 0.0), std::max(sigma_r, 0.0)};
    }
    const Tensor linear = denoise_sequence(ck.model, noisy, np);
    write_pxt(out_prefix + ".pxt", linear);
    write_pgm(out_prefix + ".pgm", gamma_correct(linear));
    std::cout << "wrote " << out_prefix << ".pgm and " << out_prefix << ".pxt\n";
}

void cmd_eval(const std::string& ckpt_path, const std::string& data_root,
              const std::string& out_csv) {
    const Checkpoint ck = load_checkpoint(ckpt_path);
    const Dataset ds = read_manifest(data_root);
    if (!fs::exists(ds.root / "clean")) throw IoError("dataset has no ground truth");
    auto rows = evaluate_dataset(ck.model, ds, "model");
    for (const char* suffix : {"noisy_ref", "direct_avg", "model"}) {
        rows.push_back(mean_of(rows, suffix));
    }
    std::ofstream os(out_csv);
    if (!os) throw IoError("cannot write " + out_csv);
    os << "name,psnr,ssim\n";
    for (const auto& r : rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%s,%.4f,%.4f\n", r.name.c_str(), r.psnr, r.ssim);
        os << line;
        std::cout << line;
    }
}

void cmd_visgrid(const std::string& ckpt_path, const std::string& input_dir, int pu, int pv,
                 const std::string& out_csv, double sigma_s, double sigma_r) {
    const Checkpoint ck = load_checkpoint(ckpt_path);
    if (ck.model.cfg.direct) throw ConfigError("direct-synthesis checkpoints have no grid");
    const fs::path in(input_dir);
    Tensor noisy;
    if (fs::exists(in / "frame_00.pxt")) {
        noisy = load_sequence_frames(in, "pxt");
    } else {
        noisy = inverse_gamma(load_sequence_frames(in, "pgm"));
    }
    Tensor input = noisy;
    if (ck.model.cfg.dim == 2 && noisy.dim(0) != 1) {
        const int f = noisy.dim(0), h = noisy.dim(1), w = noisy.dim(2);
        input = Tensor({1, h, w});
        std::copy(noisy.data() + static_cast<std::int64_t>(f / 2) * h * w,
                  noisy.data() + static_cast<std::int64_t>(f / 2 + 1) * h * w, input.data());
    }
    Tensor noise_map;
    const Tensor* nm = nullptr;
    if (!ck.model.cfg.blind) {
        if (sigma_s < 0.0 && sigma_r < 0.0) {
            throw ConfigError("non-blind checkpoint needs --sigma-s/--sigma-r");
        }
        const int f = input.dim(0), h = input.dim(1), w = input.dim(2);
        Tensor ref({h, w});
        std::copy(input.data() + static_cast<std::int64_t>(f / 2) * h * w,
                  input.data() + static_cast<std::int64_t>(f / 2 + 1) * h * w, ref.data());
        noise_map = estimate_noise_level(ref, {std::max(sigma_s, 0.0), std::max(sigma_r, 0.0)});
        nm = &noise_map;
    }
    if (pu < 0 || pu >= input.dim(1) || pv < 0 || pv >= input.dim(2)) {
        throw ConfigError("pixel out of bounds");
    }
    const ForwardResult fwd = model_forward(ck.model, input, nm, 0);
    const Model& m = ck.model;
    std::ofstream os(out_csv);
    if (!os) throw IoError("cannot write " + out_csv);
    const bool video = m.cfg.dim == 3;
    os << (video ? "i,du,dv,dt,weight\n" : "i,du,dv,weight\n");
    for (int i = 0; i < m.grid.n(); ++i) {
        const auto& p = m.grid.points[static_cast<std::size_t>(i)];
        char line[160];
        if (video) {
            std::snprintf(line, sizeof(line), "%d,%.5f,%.5f,%.5f,%.6f\n", i,
                          p[0] + fwd.offsets.at(pu, pv, i, 0), p[1] + fwd.offsets.at(pu, pv, i, 1),
                          p[2] + fwd.offsets.at(pu, pv, i, 2), fwd.weights.at(pu, pv, i));
        } else {
            std::snprintf(line, sizeof(line), "%d,%.5f,%.5f,%.6f\n", i,
                          p[0] + fwd.offsets.at(pu, pv, i, 0), p[1] + fwd.offsets.at(pu, pv, i, 1),
                          fwd.weights.at(pu, pv, i));
        }
        os << line;
    }
    std::cout << "receptive_field=" << receptive_field_stat(fwd.offsets, m.grid) << "\n";
    std::cout << "wrote " << out_csv << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"learned spatial/spatio-temporal pixel aggregation denoiser"};
    app.require_subcommand(1);
    app.set_config("--config")->configurable(false);
    app.allow_config_extras(false);

    std::uint64_t seed = 0;
    int threads = 1;
    app.add_option("--seed", seed, "global random seed")->configurable(true);
    app.add_option("--threads", threads, "worker thread cap")->configurable(true);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    SynthConfig sc;
    std::string synth_out = "dataset";
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--count", sc.count, "number of sequences");
    synth->add_option("--tau", sc.tau, "temporal radius");
    synth->add_option("--size", sc.size, "frame height/width");
    synth->add_option("--sigma-s", sc.sigma_s, "shot noise (fixed; <0 samples per sequence)");
    synth->add_option("--sigma-r", sc.sigma_r, "read noise (fixed; <0 samples per sequence)");
    synth->add_option("--shift", sc.shift, "inter-frame motion in pixels (<0: random 0..6)");

    // train
    auto* train_cmd = app.add_subcommand("train", "train a model");
    TrainConfig tc;
    std::string train_data, train_out = "run";
    train_cmd->add_option("--mode", tc.mode,
                          "pan|stpan|rigid|fixed-weights|direct|no-reg|no-concat");
    train_cmd->add_option("--data", train_data, "dataset directory")->required();
    train_cmd->add_option("--out", train_out, "output directory");
    train_cmd->add_option("--iters", tc.iters, "training iterations");
    train_cmd->add_option("--batch", tc.batch, "batch size");
    train_cmd->add_option("--patch", tc.patch, "training patch size");
    train_cmd->add_option("--sigma-s", tc.sigma_s, "fixed shot noise (<0: sample per iteration)");
    train_cmd->add_option("--sigma-r", tc.sigma_r, "fixed read noise (<0: sample per iteration)");
    train_cmd->add_option("--eta", tc.eta, "regularizer eta");
    train_cmd->add_option("--gamma", tc.gamma, "regularizer annealing factor");
    train_cmd->add_option("--groups", tc.groups, "regularizer group count s");
    train_cmd->add_option("--lr", tc.lr, "initial learning rate");
    train_cmd->add_option("--width-mult", tc.width_mult, "channel width multiplier");
    train_cmd->add_option("--offset-scale", tc.offset_scale, "spatial offset scale");
    bool nonblind = false;
    train_cmd->add_flag("--non-blind", nonblind, "feed the noise-level map as an input channel");

    // denoise
    auto* den = app.add_subcommand("denoise", "denoise a sequence");
    std::string den_ckpt, den_in, den_out = "denoised";
    double den_ss = -1.0, den_sr = -1.0;
    den->add_option("--checkpoint", den_ckpt)->required();
    den->add_option("--input", den_in, "sequence directory")->required();
    den->add_option("--out", den_out, "output prefix");
    den->add_option("--sigma-s", den_ss, "noise level for non-blind models");
    den->add_option("--sigma-r", den_sr, "noise level for non-blind models");

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    std::string ev_ckpt, ev_data, ev_out = "metrics.csv";
    ev->add_option("--checkpoint", ev_ckpt)->required();
    ev->add_option("--data", ev_data)->required();
    ev->add_option("--out", ev_out, "output CSV");

    // visgrid
    auto* vg = app.add_subcommand("visgrid", "dump the sampling grid at one pixel");
    std::string vg_ckpt, vg_in, vg_out = "grid.csv";
    int vg_u = 0, vg_v = 0;
    double vg_ss = -1.0, vg_sr = -1.0;
    vg->add_option("--checkpoint", vg_ckpt)->required();
    vg->add_option("--input", vg_in, "sequence directory")->required();
    vg->add_option("--u", vg_u, "pixel row");
    vg->add_option("--v", vg_v, "pixel column");
    vg->add_option("--out", vg_out, "output CSV");
    vg->add_option("--sigma-s", vg_ss);
    vg->add_option("--sigma-r", vg_sr);

    try {
        app.parse(argc, argv);
        set_thread_count(threads);
        if (*synth) {
            sc.seed = seed;
            sc.out = synth_out;
            synthesize_dataset(sc);
            std::cout << "wrote dataset to " << synth_out << "\n";
        } else if (*train_cmd) {
            tc.seed = seed;
            tc.blind = !nonblind;
            tc.data_root = train_data;
            tc.out_dir = train_out;
            TrainResult r = train(tc);
            std::cout << "final loss " << (r.loss_trace.empty() ? 0.0 : r.loss_trace.back())
                      << ", checkpoint " << r.checkpoint.string() << "\n";
        } else if (*den) {
            cmd_denoise(den_ckpt, den_in, den_out, den_ss, den_sr);
        } else if (*ev) {
            cmd_eval(ev_ckpt, ev_data, ev_out);
        } else if (*vg) {
            cmd_visgrid(vg_ckpt, vg_in, vg_u, vg_v, vg_out, vg_ss, vg_sr);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
