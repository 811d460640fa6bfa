// Command-line front end: dataset preparation, training, streaming
// inference, evaluation, and temporal-profile extraction.

#include <chrono>
#include <fstream>
#include <iostream>
#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ffcvsr/dataset.hpp"
#include "ffcvsr/error.hpp"
#include "ffcvsr/frame_store.hpp"
#include "ffcvsr/image_io.hpp"
#include "ffcvsr/inference.hpp"
#include "ffcvsr/metrics.hpp"
#include "ffcvsr/resample.hpp"
#include "ffcvsr/trainer.hpp"
#include "ffcvsr/weights_io.hpp"

namespace {

using namespace ffcvsr;

void add_model_flags(CLI::App* sub, ModelConfig& cfg) {
    sub->add_option("--scale", cfg.scale, "Upsampling factor")->capture_default_str();
    sub->add_option("--trunk-width", cfg.trunk_width, "Channels in the conv trunks")
        ->capture_default_str();
    sub->add_option("--feature-channels", cfg.feature_channels,
                    "Channels of the recurrent feature map")
        ->capture_default_str();
    sub->add_option("--resblocks-local", cfg.resblocks_local, "ResBlocks in the local network")
        ->capture_default_str();
    sub->add_option("--resblocks-context", cfg.resblocks_context,
                    "ResBlocks in the context network")
        ->capture_default_str();
    sub->add_option("--temporal-radius", cfg.temporal_radius,
                    "LR frames on each side of the center frame")
        ->capture_default_str();
}

void add_config_file(CLI::App* sub, std::string& path) {
    sub->add_option("--config", path, "Configuration file (key = value lines, # comments)");
}

std::string trim(const std::string& s) {
    const size_t first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return "";
    const size_t last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

// Expands a config file into "--key=value" tokens. Keys use the long option
// names; keys already given on the command line are dropped, so flags
// override file values. Unknown keys surface as normal usage errors.
std::vector<std::string> config_tokens(const std::string& path,
                                       const std::vector<std::string>& argv_tokens) {
    std::ifstream is(path);
    check(is.good(), "config: cannot open '", path, "'");

    auto given_on_cli = [&](const std::string& key) {
        const std::string flag = "--" + key;
        for (const std::string& arg : argv_tokens)
            if (arg == flag || arg.rfind(flag + "=", 0) == 0)
                return true;
        return false;
    };

    std::vector<std::string> tokens;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        line_no += 1;
        const size_t comment = line.find('#');
        if (comment != std::string::npos)
            line = line.substr(0, comment);
        line = trim(line);
        if (line.empty())
            continue;
        const size_t eq = line.find('=');
        check(eq != std::string::npos, "config: line ", line_no, " of '", path,
              "' is not a key = value pair");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        check(!key.empty(), "config: empty key on line ", line_no, " of '", path, "'");
        check(key != "config", "config: nested config files are not permitted (line ", line_no,
              ")");
        if (!given_on_cli(key))
            tokens.push_back("--" + key + "=" + value);
    }
    return tokens;
}

struct PrepareArgs {
    std::string in_dir, out_dir;
    DatasetParams params;
};

int run_prepare(const PrepareArgs& args) {
    DatasetManifest manifest = prepare_dataset(args.in_dir, args.out_dir, args.params);
    std::cout << "clips\t" << manifest.clips.size() << "\n"
              << "skipped_scene_cuts\t" << manifest.skipped_scene_cuts << "\n"
              << "skipped_short_videos\t" << manifest.skipped_short_videos << "\n";
    return 0;
}

struct TrainArgs {
    std::string manifest, out_path, log_path, val_manifest, mode = "full";
    ModelConfig model;
    TrainConfig config;
    int log_every = 50;
    bool no_augment = false;
};

int run_train(const TrainArgs& args) {
    std::vector<Clip> clips = load_clips(args.manifest);

    TrainOptions options;
    options.mode = args.mode == "local-only" ? TrainMode::local_only : TrainMode::full;
    options.augment = !args.no_augment;
    options.log_every = args.log_every;
    options.abort_checkpoint_path = args.out_path + ".aborted";

    std::vector<Clip> val_clips;
    if (!args.val_manifest.empty()) {
        val_clips = load_clips(args.val_manifest);
        const ModelConfig model = args.model;
        const bool local_only = options.mode == TrainMode::local_only;
        options.validator = [&val_clips, model, local_only](const ModelWeights& w) {
            InferenceOptions inf;
            inf.local_only = local_only;
            double sum = 0.0;
            int64_t frames = 0;
            for (const Clip& clip : val_clips) {
                std::vector<Tensor> sr = super_resolve_video(clip.lr_frames, w, model, inf);
                for (size_t i = 0; i < sr.size(); ++i) {
                    const double p = psnr(clamp01(sr[i]), clip.hr_frames[i]);
                    if (p != kPsnrInfinity) {
                        sum += p;
                        frames += 1;
                    }
                }
            }
            return frames > 0 ? sum / frames : 0.0;
        };
    }

    std::ofstream log;
    if (!args.log_path.empty()) {
        log.open(args.log_path, std::ios::trunc);
        check(log.good(), "train: cannot open log file '", args.log_path, "'");
        log << "step\tloss\tlr" << (options.validator ? "\tval_psnr" : "") << "\n";
    }
    options.on_log = [&](const TrainLogEntry& e) {
        std::cout << "step " << e.step << "  loss " << e.loss << "  lr " << e.learning_rate;
        if (e.has_validation)
            std::cout << "  val_psnr " << e.validation_psnr;
        std::cout << "\n";
        if (log.is_open()) {
            log << e.step << "\t" << e.loss << "\t" << e.learning_rate;
            if (e.has_validation)
                log << "\t" << e.validation_psnr;
            log << "\n";
        }
    };

    TrainResult result = train(clips, args.model, args.config, options);
    save_weights(result.weights, args.out_path);
    save_optimizer_state(result.optimizer, args.out_path + ".opt");
    std::cout << "weights\t" << args.out_path << "\n";
    return 0;
}

struct InferArgs {
    std::string weights_path, in_dir, out_dir, format = "png";
    ModelConfig model;
    InferenceOptions options;
    bool luma = false;
};

int run_infer(const InferArgs& args) {
    ModelWeights weights = load_weights(args.weights_path, args.model);
    FrameStore in = FrameStore::open(args.in_dir);
    check(in.frame_count() > 0, "infer: input store is empty");
    std::vector<Tensor> frames = in.read_all(args.luma);

    FrameStore out = FrameStore::create(args.out_dir, args.format);
    InferenceSession session(weights, args.model, args.options);

    const auto start = std::chrono::steady_clock::now();
    for (int64_t t = 0; t < static_cast<int64_t>(frames.size()); ++t) {
        Tensor sr = session.step(window_for_frame(frames, t, args.model.temporal_radius));
        out.append(clamp01(sr));
    }
    const auto stop = std::chrono::steady_clock::now();
    const double ms =
        std::chrono::duration<double, std::milli>(stop - start).count() / frames.size();
    std::cout << "frames\t" << frames.size() << "\n";
    std::cout << "ms_per_frame\t" << ms << "\n";
    return 0;
}

struct EvaluateArgs {
    std::string sr_dir, hr_dir, out_path;
    int64_t border_crop = 4;
    bool quantize = false;
};

int run_evaluate(const EvaluateArgs& args) {
    std::vector<Tensor> sr = FrameStore::open(args.sr_dir).read_all();
    std::vector<Tensor> hr = FrameStore::open(args.hr_dir).read_all();
    if (args.quantize) {
        for (Tensor& f : sr)
            f = quantize_8bit(f);
        for (Tensor& f : hr)
            f = quantize_8bit(f);
    }
    EvalReport report = evaluate_video(sr, hr, args.border_crop);
    if (args.out_path.empty()) {
        std::cout << report.to_text();
    } else {
        std::ofstream os(args.out_path, std::ios::trunc);
        check(os.good(), "evaluate: cannot open '", args.out_path, "' for writing");
        os << report.to_text();
    }
    return 0;
}

struct ProfileArgs {
    std::string in_dir, out_path;
    int64_t row = 0;
};

int run_profile(const ProfileArgs& args) {
    std::vector<Tensor> frames = FrameStore::open(args.in_dir).read_all();
    Tensor profile = temporal_profile(frames, args.row);
    write_frame(profile, args.out_path);
    std::cout << "profile\t" << args.out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FFCVSR video super-resolution"};
    app.require_subcommand(1);

    PrepareArgs prepare;
    CLI::App* prep = app.add_subcommand("prepare-data", "Build a training dataset");
    prep->add_option("--in", prepare.in_dir, "Source frame directory")->required();
    prep->add_option("--out", prepare.out_dir, "Output dataset directory")->required();
    prep->add_option("--scale", prepare.params.scale, "LR downsampling factor")
        ->capture_default_str();
    prep->add_option("--pyramid", prepare.params.pyramid_factors,
                     "Pyramid downscale factors applied to the source")
        ->capture_default_str();
    prep->add_option("--patch-size", prepare.params.patch_size, "HR patch extent")
        ->capture_default_str();
    prep->add_option("--clip-length", prepare.params.clip_length, "Frames per clip")
        ->capture_default_str();
    prep->add_option("--mad-threshold", prepare.params.mad_threshold,
                     "Scene-cut rejection threshold (mean absolute difference)")
        ->capture_default_str();
    prep->add_option("--format", prepare.params.frame_format, "Clip frame format (png|pgm)")
        ->check(CLI::IsMember({"png", "pgm"}))
        ->capture_default_str();
    prep->add_flag("--luma", prepare.params.luma_convert, "Convert color source frames to luma");
    std::string prepare_config;
    add_config_file(prep, prepare_config);

    TrainArgs train_args;
    CLI::App* tr = app.add_subcommand("train", "Train the model");
    tr->add_option("--manifest", train_args.manifest, "Dataset manifest")->required();
    tr->add_option("--out", train_args.out_path, "Output weights file")->required();
    tr->add_option("--log", train_args.log_path, "Loss log file");
    tr->add_option("--val-manifest", train_args.val_manifest,
                   "Validation dataset manifest (reports PSNR at log points)");
    add_model_flags(tr, train_args.model);
    tr->add_option("--steps", train_args.config.total_steps, "Optimization steps")
        ->capture_default_str();
    tr->add_option("--batch-size", train_args.config.batch_size, "Clips per step")
        ->capture_default_str();
    tr->add_option("--clip-length", train_args.config.clip_length, "Training clip length")
        ->capture_default_str();
    tr->add_option("--seed", train_args.config.seed, "Random seed")->capture_default_str();
    tr->add_option("--lr", train_args.config.lr_initial, "Initial learning rate")
        ->capture_default_str();
    tr->add_option("--lr-late", train_args.config.lr_late, "Late learning rate")
        ->capture_default_str();
    CLI::Option* lr_switch_opt =
        tr->add_option("--lr-switch-step", train_args.config.lr_switch_step,
                       "Step at which the learning rate switches (defaults to min(300000, "
                       "--steps))")
            ->capture_default_str();
    tr->add_option("--log-every", train_args.log_every, "Log period in steps")
        ->capture_default_str();
    tr->add_option("--mode", train_args.mode, "Training mode")
        ->check(CLI::IsMember({"full", "local-only"}))
        ->capture_default_str();
    tr->add_flag("--no-augment", train_args.no_augment, "Disable data augmentation");
    std::string train_config_path;
    add_config_file(tr, train_config_path);

    InferArgs infer_args;
    std::string first_frame_mode = "bootstrap";
    CLI::App* inf = app.add_subcommand("infer", "Super-resolve a video");
    inf->add_option("--weights", infer_args.weights_path, "Weights file")->required();
    inf->add_option("--in", infer_args.in_dir, "LR input frame directory")->required();
    inf->add_option("--out", infer_args.out_dir, "SR output frame directory")->required();
    add_model_flags(inf, infer_args.model);
    inf->add_option("--reset-period", infer_args.options.reset_period,
                    "Suppression-updating period T (0 disables resets)")
        ->capture_default_str();
    inf->add_option("--first-frame-mode", first_frame_mode, "First-frame handling")
        ->check(CLI::IsMember({"bootstrap", "algorithm1"}))
        ->capture_default_str();
    inf->add_flag("--local-only", infer_args.options.local_only,
                  "Emit the local network's output only (context network ablated)");
    inf->add_option("--format", infer_args.format, "Output frame format (png|pgm)")
        ->check(CLI::IsMember({"png", "pgm"}))
        ->capture_default_str();
    inf->add_flag("--luma", infer_args.luma, "Convert color input frames to luma");
    std::string infer_config;
    add_config_file(inf, infer_config);

    EvaluateArgs eval_args;
    CLI::App* ev = app.add_subcommand("evaluate", "Compute PSNR/SSIM of SR frames against HR");
    ev->add_option("--sr", eval_args.sr_dir, "SR frame directory")->required();
    ev->add_option("--hr", eval_args.hr_dir, "HR ground-truth frame directory")->required();
    ev->add_option("--border-crop", eval_args.border_crop,
                   "Pixels cropped from every side before metrics")
        ->capture_default_str();
    ev->add_flag("--quantize", eval_args.quantize, "Quantize frames to 8 bit before metrics");
    ev->add_option("--out", eval_args.out_path, "Report file (default: stdout)");
    std::string eval_config;
    add_config_file(ev, eval_config);

    ProfileArgs profile_args;
    CLI::App* prof = app.add_subcommand("profile", "Extract a temporal profile image");
    prof->add_option("--in", profile_args.in_dir, "Frame directory")->required();
    prof->add_option("--row", profile_args.row, "Pixel row to stack across frames")->required();
    prof->add_option("--out", profile_args.out_path, "Output image path")->required();
    std::string profile_config;
    add_config_file(prof, profile_config);

    std::vector<std::string> tokens(argv + 1, argv + argc);
    try {
        // Merge config-file values before parsing; command-line flags win.
        std::string config_path;
        for (size_t i = 0; i < tokens.size(); ++i) {
            if (tokens[i] == "--config" && i + 1 < tokens.size())
                config_path = tokens[i + 1];
            else if (tokens[i].rfind("--config=", 0) == 0)
                config_path = tokens[i].substr(9);
        }
        if (!config_path.empty())
            for (const std::string& t : config_tokens(config_path, tokens))
                tokens.push_back(t);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }

    try {
        std::vector<const char*> args;
        args.push_back(argv[0]);
        for (const std::string& t : tokens)
            args.push_back(t.c_str());
        app.parse(static_cast<int>(args.size()), args.data());
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }

    try {
        if (prep->parsed())
            return run_prepare(prepare);
        if (tr->parsed()) {
            if (lr_switch_opt->count() == 0)
                train_args.config.lr_switch_step =
                    std::min<int64_t>(train_args.config.lr_switch_step,
                                      train_args.config.total_steps);
            return run_train(train_args);
        }
        if (inf->parsed()) {
            infer_args.options.first_frame = first_frame_mode == "algorithm1"
                                                 ? FirstFrameMode::algorithm1
                                                 : FirstFrameMode::bootstrap;
            return run_infer(infer_args);
        }
        if (ev->parsed())
            return run_evaluate(eval_args);
        if (prof->parsed())
            return run_profile(profile_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
