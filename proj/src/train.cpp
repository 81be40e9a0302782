#include "pixagg/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "pixagg/io.hpp"
#include "pixagg/metrics.hpp"

namespace pixagg {

namespace {

std::string seq_dir_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "seq_%04d", i);
    return buf;
}

std::string frame_file(int k, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%02d.%s", k, ext);
    return buf;
}

} // namespace

void synthesize_dataset(const SynthConfig& cfg) {
    if (cfg.count < 1 || cfg.size < 8 || cfg.tau < 0) {
        throw ConfigError("synth: count >= 1, size >= 8, tau >= 0 required");
    }
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out / "clean");
    fs::create_directories(cfg.out / "noisy");

    Dataset ds;
    ds.root = cfg.out;
    ds.tau = cfg.tau;
    Rng master(cfg.seed);
    for (int i = 0; i < cfg.count; ++i) {
        Rng rng = master.split(static_cast<std::uint64_t>(i));
        DatasetEntry e;
        e.name = seq_dir_name(i);
        e.shift_px = cfg.shift >= 0.0 ? cfg.shift : static_cast<double>(rng.uniform_int(7));
        if (cfg.sigma_s >= 0.0 || cfg.sigma_r >= 0.0) {
            e.params.sigma_s = std::max(cfg.sigma_s, 0.0);
            e.params.sigma_r = std::max(cfg.sigma_r, 0.0);
        } else {
            e.params = sample_noise_params(rng);
        }

        SequenceSpec spec;
        spec.frames = 2 * cfg.tau + 1;
        spec.height = cfg.size;
        spec.width = cfg.size;
        spec.shift_px = e.shift_px;
        const Tensor clean_srgb = generate_clean_sequence(spec, rng);
        SequenceSample sample = synthesize_pair(clean_srgb, cfg.tau, e.params, rng);

        const fs::path cdir = cfg.out / "clean" / e.name;
        const fs::path ndir = cfg.out / "noisy" / e.name;
        fs::create_directories(cdir);
        fs::create_directories(ndir);
        const int h = cfg.size, w = cfg.size;
        for (int k = 0; k < spec.frames; ++k) {
            Tensor frame({h, w});
            std::copy(clean_srgb.data() + static_cast<std::int64_t>(k) * h * w,
                      clean_srgb.data() + static_cast<std::int64_t>(k + 1) * h * w, frame.data());
            write_pgm(cdir / frame_file(k, "pgm"), frame, 65535);
            Tensor nframe({h, w});
            std::copy(sample.noisy.data() + static_cast<std::int64_t>(k) * h * w,
                      sample.noisy.data() + static_cast<std::int64_t>(k + 1) * h * w,
                      nframe.data());
            write_pxt(ndir / frame_file(k, "pxt"), nframe);
        }
        ds.entries.push_back(std::move(e));
    }
    write_manifest(ds);
    // Record the resolved settings next to the outputs.
    std::ofstream cfgout(cfg.out / "synth_config.txt");
    cfgout << "seed=" << cfg.seed << "\ncount=" << cfg.count << "\ntau=" << cfg.tau
           << "\nsize=" << cfg.size << "\nsigma_s=" << cfg.sigma_s << "\nsigma_r=" << cfg.sigma_r
           << "\nshift=" << cfg.shift << "\n";
}

ModelConfig model_config_for_mode(const TrainConfig& cfg) {
    ModelConfig mc;
    mc.width_mult = cfg.width_mult;
    mc.offset_scale = cfg.offset_scale;
    mc.blind = cfg.blind;
    if (cfg.mode == "pan") {
        mc.dim = 2;
        mc.grid_extents = {5, 5, 1};
    } else if (cfg.mode == "stpan" || cfg.mode == "no-reg") {
        mc.dim = 3;
        mc.grid_extents = {3, 3, 3};
    } else if (cfg.mode == "rigid") {
        mc.dim = 3;
        mc.grid_extents = {3, 3, 3};
        mc.rigid = true;
    } else if (cfg.mode == "fixed-weights") {
        mc.dim = 3;
        mc.grid_extents = {3, 3, 3};
        mc.fixed_weights = true;
    } else if (cfg.mode == "direct") {
        mc.dim = 3;
        mc.grid_extents = {3, 3, 3};
        mc.direct = true;
    } else if (cfg.mode == "no-concat") {
        mc.dim = 3;
        mc.grid_extents = {3, 3, 3};
        mc.concat_sampled = false;
    } else {
        throw ConfigError("unknown training mode: " + cfg.mode);
    }
    return mc;
}

TrainResult train(const TrainConfig& cfg) {
    namespace fs = std::filesystem;
    const Dataset ds = read_manifest(cfg.data_root);
    if (ds.entries.empty()) throw ConfigError("empty dataset");
    if (cfg.patch % ModelConfig::kDepthFactor != 0) {
        throw ConfigError("patch size must be divisible by " +
                          std::to_string(ModelConfig::kDepthFactor));
    }

    // Clean sRGB frames in memory; noise is drawn per iteration.
    std::vector<Tensor> clean_seqs;
    clean_seqs.reserve(ds.entries.size());
    for (const auto& e : ds.entries) {
        clean_seqs.push_back(load_sequence_frames(ds.root / "clean" / e.name, "pgm"));
    }

    TrainResult result;
    result.model.cfg = model_config_for_mode(cfg);
    if (result.model.cfg.dim == 3) result.model.cfg.tau = ds.tau;
    result.model.build();
    result.model.init_params(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    const bool video = result.model.cfg.dim == 3;
    const bool regularized = video && !result.model.cfg.direct && cfg.mode != "no-reg" &&
                             cfg.groups > 1 && result.model.grid.n() % cfg.groups == 0;
    const AnnealSchedule sched{cfg.eta, cfg.gamma};

    AdamState adam;
    adam.lr = cfg.lr;
    auto params = result.model.parameters();

    fs::create_directories(cfg.out_dir);
    std::ofstream log(cfg.out_dir / "loss_log.csv");
    log << "iteration,loss,anneal_coeff,lr\n";

    Rng data_rng = Rng(cfg.seed).split(1);
    const int iters_per_epoch =
        std::max<int>(1, static_cast<int>(ds.entries.size()) / std::max(1, cfg.batch));

    for (int m = 0; m < cfg.iters; ++m) {
        std::vector<Tensor> batch_grads;
        double batch_loss = 0.0;
        for (int b = 0; b < cfg.batch; ++b) {
            const int si = static_cast<int>(data_rng.uniform_int(
                static_cast<std::int64_t>(ds.entries.size())));
            NoiseParams np;
            if (cfg.sigma_s >= 0.0 || cfg.sigma_r >= 0.0) {
                np.sigma_s = std::max(cfg.sigma_s, 0.0);
                np.sigma_r = std::max(cfg.sigma_r, 0.0);
            } else {
                np = sample_noise_params(data_rng);
            }
            SequenceSample sample = synthesize_pair(clean_seqs[static_cast<std::size_t>(si)],
                                                    ds.tau, np, data_rng);
            sample = extract_patches(sample, cfg.patch, data_rng);

            Tensor input_frames;
            if (video) {
                input_frames = sample.noisy;
            } else {
                const Tensor ref = sample.noisy_reference();
                input_frames = Tensor({1, cfg.patch, cfg.patch});
                std::copy(ref.data(), ref.data() + ref.size(), input_frames.data());
            }
            Tensor noise_map;
            const Tensor* nm = nullptr;
            if (!cfg.blind) {
                noise_map = estimate_noise_level(sample.noisy_reference(), np);
                nm = &noise_map;
            }

            const int groups = regularized ? cfg.groups : 0;
            ForwardResult fwd = model_forward(result.model, input_frames, nm, groups);
            const Tensor gt = sample.clean_reference();

            std::vector<Tensor> grad_groups;
            Tensor grad_y;
            double loss;
            if (groups > 0) {
                VideoLossGrad lg = video_loss_grad(fwd.y, fwd.y_groups, gt, sched, m, groups);
                loss = lg.value;
                grad_y = std::move(lg.grad_y);
                grad_groups = std::move(lg.grad_groups);
            } else {
                LossGrad lg = l1_gamma_loss_grad(fwd.y, gt);
                loss = lg.value;
                grad_y = std::move(lg.grad);
            }
            batch_loss += loss;

            std::vector<Tensor> g = model_backward(result.model, fwd, grad_y, grad_groups);
            if (batch_grads.empty()) {
                batch_grads = std::move(g);
            } else {
                for (std::size_t i = 0; i < g.size(); ++i) batch_grads[i] += g[i];
            }
        }
        const float inv_batch = 1.0f / static_cast<float>(cfg.batch);
        for (auto& g : batch_grads) g *= inv_batch;
        batch_loss /= cfg.batch;

        adam.step(params, batch_grads);
        if ((m + 1) % iters_per_epoch == 0) adam.decay_epoch();

        result.loss_trace.push_back(batch_loss);
        char line[128];
        std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.9g\n", m, batch_loss,
                      anneal_coeff(sched, m), adam.lr);
        log << line;
    }

    result.checkpoint = cfg.out_dir / "checkpoint.pxc";
    save_checkpoint(result.checkpoint, result.model, cfg.iters);
    // Record the resolved config alongside the checkpoint.
    std::ofstream cfgout(cfg.out_dir / "train_config.txt");
    cfgout << "mode=" << cfg.mode << "\ndata=" << cfg.data_root.string()
           << "\niters=" << cfg.iters << "\nbatch=" << cfg.batch << "\npatch=" << cfg.patch
           << "\nseed=" << cfg.seed << "\nsigma_s=" << cfg.sigma_s << "\nsigma_r=" << cfg.sigma_r
           << "\neta=" << cfg.eta << "\ngamma=" << cfg.gamma << "\ngroups=" << cfg.groups
           << "\nlr=" << cfg.lr << "\nwidth_mult=" << cfg.width_mult
           << "\noffset_scale=" << cfg.offset_scale << "\nblind=" << cfg.blind << "\n";
    return result;
}

Tensor denoise_sequence(const Model& m, const Tensor& noisy_frames,
                        const std::optional<NoiseParams>& params) {
    Tensor input = noisy_frames;
    if (m.cfg.dim == 2 && noisy_frames.dim(0) != 1) {
        // Single-image model applied to a sequence: use the center frame.
        const int f = noisy_frames.dim(0), h = noisy_frames.dim(1), w = noisy_frames.dim(2);
        input = Tensor({1, h, w});
        std::copy(noisy_frames.data() + static_cast<std::int64_t>(f / 2) * h * w,
                  noisy_frames.data() + static_cast<std::int64_t>(f / 2 + 1) * h * w,
                  input.data());
    }
    if (m.cfg.dim == 3 && input.dim(0) != m.cfg.frames()) {
        throw ConfigError("sequence frame count does not match the checkpoint's tau");
    }
    Tensor noise_map;
    const Tensor* nm = nullptr;
    if (!m.cfg.blind) {
        if (!params) throw ConfigError("non-blind checkpoint requires noise parameters");
        const int f = input.dim(0), h = input.dim(1), w = input.dim(2);
        Tensor ref({h, w});
        std::copy(input.data() + static_cast<std::int64_t>(f / 2) * h * w,
                  input.data() + static_cast<std::int64_t>(f / 2 + 1) * h * w, ref.data());
        noise_map = estimate_noise_level(ref, *params);
        nm = &noise_map;
    }
    return model_forward(m, input, nm, 0).y;
}

std::vector<EvalRow> evaluate_dataset(const Model& m, const Dataset& ds,
                                      const std::string& model_name) {
    std::vector<EvalRow> rows;
    for (const auto& e : ds.entries) {
        const Tensor clean_srgb = load_sequence_frames(ds.root / "clean" / e.name, "pgm");
        const Tensor noisy = load_sequence_frames(ds.root / "noisy" / e.name, "pxt");
        const int f = noisy.dim(0), h = noisy.dim(1), w = noisy.dim(2);
        Tensor gt({h, w});
        std::copy(clean_srgb.data() + static_cast<std::int64_t>(f / 2) * h * w,
                  clean_srgb.data() + static_cast<std::int64_t>(f / 2 + 1) * h * w, gt.data());

        Tensor noisy_ref({h, w});
        std::copy(noisy.data() + static_cast<std::int64_t>(f / 2) * h * w,
                  noisy.data() + static_cast<std::int64_t>(f / 2 + 1) * h * w, noisy_ref.data());

        Tensor avg({h, w});
        for (int k = 0; k < f; ++k) {
            for (std::int64_t i = 0; i < avg.size(); ++i) {
                avg[i] += noisy[static_cast<std::int64_t>(k) * h * w + i] / f;
            }
        }

        const Tensor denoised = denoise_sequence(m, noisy, e.params);

        const Tensor g_ref = gamma_correct(noisy_ref);
        const Tensor g_avg = gamma_correct(avg);
        const Tensor g_out = gamma_correct(denoised);
        rows.push_back({e.name + "/noisy_ref", psnr(g_ref, gt), ssim(g_ref, gt)});
        rows.push_back({e.name + "/direct_avg", psnr(g_avg, gt), ssim(g_avg, gt)});
        rows.push_back({e.name + "/" + model_name, psnr(g_out, gt), ssim(g_out, gt)});
    }
    return rows;
}

EvalRow mean_of(const std::vector<EvalRow>& rows, const std::string& suffix) {
    EvalRow out{"mean/" + suffix, 0.0, 0.0};
    int count = 0;
    for (const auto& r : rows) {
        if (r.name.size() >= suffix.size() &&
            r.name.compare(r.name.size() - suffix.size(), suffix.size(), suffix) == 0) {
            out.psnr += r.psnr;
            out.ssim += r.ssim;
            ++count;
        }
    }
    if (count > 0) {
        out.psnr /= count;
        out.ssim /= count;
    }
    return out;
}

} // namespace pixagg
