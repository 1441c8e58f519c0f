// Command-line front end: synth, detect, repeat, ablate, bench.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ced/ced.hpp"

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string input;
    std::string output;
    std::string format;
    std::optional<double> radius;
    double t_g = 0.2;
    double t_c = 0.5;
    std::string mode = "ced";
    std::uint32_t min_neighbors = 5;
    std::optional<double> voxel;
    std::optional<double> epsilon;
    std::optional<double> sigma;
    std::size_t trials = 10;
    std::string seed;
    unsigned threads = 1;
    std::optional<std::size_t> count;
    bool no_timing = false;
    std::vector<double> tg_list{0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<double> tc_list{0.1};
    std::size_t repetitions = 5;
    std::string kind = "room_composite";
    std::optional<double> extent;
    std::optional<double> pitch;
    std::optional<double> tile;
    std::optional<double> jitter;
};

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("ced");
    logger->set_pattern("%^%l%$: %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    if (const char* level = std::getenv("CED_LOG")) spdlog::set_level(spdlog::level::from_str(level));
}

std::optional<std::uint64_t> parse_seed(const std::string& text) {
    if (text.empty()) return std::nullopt;
    return std::stoull(text);
}

ced::CloudFormat format_for(const Options& o, const fs::path& path) {
    if (o.format == "ply") return ced::CloudFormat::PlyAscii;
    if (o.format == "ply-bin") return ced::CloudFormat::PlyBinaryLE;
    if (o.format == "pcd") return ced::CloudFormat::PcdAscii;
    return path.extension() == ".pcd" ? ced::CloudFormat::PcdAscii : ced::CloudFormat::PlyBinaryLE;
}

ced::ColoredPointCloud load_input(const Options& o) {
    ced::ColoredPointCloud cloud = ced::remove_invalid(ced::load_cloud(o.input));
    if (o.voxel) cloud = ced::voxel_downsample(cloud, *o.voxel);
    if (cloud.empty()) throw ced::Error(ced::ErrorCode::EmptyCloud, "input holds no valid points");
    spdlog::debug("{} points, resolution {}", cloud.size(), cloud.resolution);
    return cloud;
}

ced::DetectorParams detector_params(const Options& o, const ced::ColoredPointCloud& cloud) {
    ced::DetectorParams params = ced::DetectorParams::for_resolution(cloud.resolution);
    if (o.radius) params.radius = *o.radius;
    params.t_g = o.t_g;
    params.t_c = o.t_c;
    params.min_neighbors = o.min_neighbors;
    params.mode = o.mode == "ced3d" ? ced::DetectorMode::Ced3D : ced::DetectorMode::Ced;
    params.validate();
    return params;
}

/// Detector of `--mode`; the random detector gets `--count` or as many
/// keypoints as CED finds on `cloud`.
ced::DetectorConfig detector_config(const Options& o, const ced::ColoredPointCloud& cloud) {
    const ced::DetectorParams params = detector_params(o, cloud);
    ced::DetectorConfig config;
    if (o.mode == "random") {
        const std::size_t count = o.count ? *o.count : ced::matched_random_count(cloud, params, o.threads);
        config = ced::DetectorConfig::random(count, 7);
        if (auto seed = parse_seed(o.seed)) config.seed = *seed;
        config.params = params;
    } else {
        config = ced::DetectorConfig::ced(params);
    }
    config.threads = o.threads;
    return config;
}

ced::RepeatabilityConfig repeatability_config(const Options& o, const ced::ColoredPointCloud& cloud) {
    ced::RepeatabilityConfig config = ced::RepeatabilityConfig::for_resolution(cloud.resolution);
    if (o.epsilon) config.epsilon = *o.epsilon;
    if (o.sigma) config.sigma = *o.sigma;
    config.trials = o.trials;
    if (auto seed = parse_seed(o.seed)) {
        config.transform_seed = ced::mix_seed(*seed, 1);
        config.noise_seed = ced::mix_seed(*seed, 2);
    }
    config.validate();
    return config;
}

void emit(const Options& o, const std::string& text) {
    if (o.output.empty() || o.output == "-") std::cout << text << std::flush;
    else ced::write_file_bytes(o.output, text);
}

std::string_view mode_name(const Options& o) { return o.mode; }

int run_synth(const Options& o) {
    const auto kind = ced::scene_kind_from_string(o.kind);
    if (!kind) throw CLI::ValidationError("--kind", "unknown scene kind " + o.kind);
    ced::SceneSpec spec = ced::SceneSpec::defaults(*kind);
    if (o.extent) spec.extent = *o.extent;
    if (o.pitch) spec.pitch = *o.pitch;
    if (o.tile) spec.tile = *o.tile;
    if (o.jitter) spec.jitter = *o.jitter;
    if (auto seed = parse_seed(o.seed)) spec.seed = *seed;
    const ced::ColoredPointCloud cloud = ced::generate_scene(spec);
    ced::save_cloud(o.output, cloud, format_for(o, o.output));
    spdlog::info("{}: {} points written to {}", ced::to_string(spec.kind), cloud.size(), o.output);
    return 0;
}

int run_detect(const Options& o) {
    const ced::ColoredPointCloud cloud = load_input(o);
    const ced::DetectorConfig config = detector_config(o, cloud);
    ced::KeypointSet keypoints;
    std::optional<ced::SaliencyFields> saliency;
    if (config.kind == ced::DetectorKind::Random) {
        keypoints = ced::run_detector(config, cloud);
    } else {
        ced::Detection detection = ced::detect_with_saliency(cloud, config.params, o.threads);
        keypoints = std::move(detection.keypoints);
        saliency = std::move(detection.saliency);
    }
    for (const auto& note : keypoints.diagnostics) spdlog::warn("{}", note);
    spdlog::info("{} keypoints from {} points (radius {})", keypoints.size(), cloud.size(), config.params.radius);

    const fs::path out(o.output);
    const auto ext = out.extension();
    if (!o.output.empty() && o.output != "-" && (ext == ".ply" || ext == ".pcd")) {
        if (keypoints.size() == 0) throw ced::Error(ced::ErrorCode::EmptyCloud, "no keypoints to write");
        ced::save_cloud(out, ced::keypoint_cloud(cloud, keypoints), format_for(o, out));
    } else {
        emit(o, ced::keypoints_csv(cloud, keypoints, saliency ? &*saliency : nullptr));
    }
    return 0;
}

int run_repeat(const Options& o) {
    const ced::ColoredPointCloud cloud = load_input(o);
    const ced::DetectorConfig detector = detector_config(o, cloud);
    const ced::RepeatabilityConfig config = repeatability_config(o, cloud);
    const ced::RepeatabilityReport report = ced::evaluate_repeatability(cloud, detector, config);
    if (report.empty_keypoints) spdlog::warn("some trials produced no source keypoints");
    spdlog::info("{} repeatability {:.4f} over {} trials", mode_name(o), report.relative_repeatability, config.trials);
    emit(o, ced::repeatability_csv(report, config, mode_name(o), !o.no_timing));
    return 0;
}

int run_ablate(const Options& o) {
    if (o.mode == "random") throw CLI::ValidationError("--mode", "ablate sweeps CED thresholds; use ced or ced3d");
    const ced::ColoredPointCloud cloud = load_input(o);
    const ced::DetectorParams fixed = detector_params(o, cloud);
    ced::RepeatabilityConfig config = repeatability_config(o, cloud);
    if (!o.sigma) config.sigma = 0.0;
    const auto rows = ced::ablation_sweep(cloud, o.tg_list, o.tc_list, fixed, config, o.threads);
    emit(o, ced::ablation_csv(rows, config, !o.no_timing));
    return 0;
}

int run_bench(const Options& o) {
    const ced::ColoredPointCloud cloud = load_input(o);
    Options single = o;
    single.threads = 1;
    const ced::DetectorConfig detector = detector_config(single, cloud);
    const ced::RuntimeStats stats = ced::measure_runtime(cloud, detector, o.repetitions);
    const std::size_t keypoints = ced::run_detector(detector, cloud).size();
    spdlog::info("{}: mean {:.4f} s, median {:.4f} s over {} runs", mode_name(o), stats.mean, stats.median,
                 o.repetitions);
    emit(o, ced::runtime_csv(stats, mode_name(o), cloud.size(), keypoints));
    return 0;
}

void add_detector_flags(CLI::App& cmd, Options& o, bool sweep = false) {
    cmd.add_option("--radius", o.radius, "support radius in meters (default 5 x cloud resolution)")
        ->check(CLI::PositiveNumber);
    if (sweep) {
        cmd.add_option("--tg", o.tg_list, "comma-separated t_g values")
            ->delimiter(',')
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
        cmd.add_option("--tc", o.tc_list, "comma-separated t_c values")
            ->delimiter(',')
            ->check(CLI::Range(0.0, 3.0))
            ->capture_default_str();
    } else {
        cmd.add_option("--tg", o.t_g, "geometric threshold as a fraction of the radius")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
        cmd.add_option("--tc", o.t_c, "photometric threshold (L1 over RGB in [0,1])")
            ->check(CLI::Range(0.0, 3.0))
            ->capture_default_str();
    }
    cmd.add_option("--mode", o.mode, "detector")
        ->check(CLI::IsMember({"ced", "ced3d", "random"}))
        ->capture_default_str();
    cmd.add_option("--min-neighbors", o.min_neighbors, "smallest support that gets a saliency")
        ->check(CLI::Range(1U, 1000000U))
        ->capture_default_str();
    cmd.add_option("--count", o.count, "random detector: keypoints to draw (default: as many as CED finds)")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--voxel", o.voxel, "voxel-downsample the input with this leaf size first")
        ->check(CLI::PositiveNumber);
}

void add_eval_flags(CLI::App& cmd, Options& o) {
    cmd.add_option("--epsilon", o.epsilon, "match radius (default 2 x resolution)")->check(CLI::PositiveNumber);
    cmd.add_option("--sigma", o.sigma, "noise standard deviation (default resolution / 2; ablate: 0)")
        ->check(CLI::NonNegativeNumber);
    cmd.add_option("--trials", o.trials, "random transforms")->check(CLI::PositiveNumber)->capture_default_str();
    cmd.add_flag("--no-timing", o.no_timing, "omit wall-clock columns so output is reproducible byte for byte");
}

void add_common_flags(CLI::App& cmd, Options& o, bool needs_input) {
    auto* input = cmd.add_option("-i,--input", o.input, "input cloud (.ply or .pcd)")->check(CLI::ExistingFile);
    if (needs_input) input->required();
    cmd.add_option("-o,--output", o.output, "output file (default: standard output)");
    cmd.add_option("--format", o.format, "cloud output format (default: from extension, binary PLY)")
        ->check(CLI::IsMember({"ply", "ply-bin", "pcd"}));
    cmd.add_option("--seed", o.seed, "integer seed or 'random' (default: fixed constants)")
        ->check(CLI::Validator(
            [](std::string& text) -> std::string {
                if (text == "random") return {};
                if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos || text.size() > 19)
                    return "seed must be a non-negative integer or 'random'";
                return {};
            },
            "UINT|random"));
    cmd.add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1U, 1024U))->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    Options o;
    CLI::App app{"Centroid-distance keypoint detector for colored point clouds"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "ced 1.0.0");

    auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
    add_common_flags(*synth, o, false);
    synth->get_option("-o")->required();
    synth->add_option("--kind", o.kind, "plane | box_corner | checker_floor | room_composite")->capture_default_str();
    synth->add_option("--extent", o.extent, "scene size in meters")->check(CLI::PositiveNumber);
    synth->add_option("--pitch", o.pitch, "grid spacing in meters")->check(CLI::PositiveNumber);
    synth->add_option("--tile", o.tile, "checker tile size")->check(CLI::PositiveNumber);
    synth->add_option("--jitter", o.jitter, "in-plane jitter as a fraction of the pitch")->check(CLI::Range(0.0, 0.49));

    auto* detect = app.add_subcommand("detect", "detect keypoints; writes CSV, or a cloud for .ply/.pcd output");
    add_common_flags(*detect, o, true);
    add_detector_flags(*detect, o);

    auto* repeat = app.add_subcommand("repeat", "repeatability under random rigid motion and noise");
    add_common_flags(*repeat, o, true);
    add_detector_flags(*repeat, o);
    add_eval_flags(*repeat, o);

    auto* ablate = app.add_subcommand("ablate", "sweep t_g x t_c");
    add_common_flags(*ablate, o, true);
    add_detector_flags(*ablate, o, true);
    add_eval_flags(*ablate, o);

    auto* bench = app.add_subcommand("bench", "single-thread runtime");
    add_common_flags(*bench, o, true);
    add_detector_flags(*bench, o);
    bench->add_option("--repetitions", o.repetitions, "timed runs (at least 3)")
        ->check(CLI::Range(std::size_t{3}, std::size_t{1000}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return 2;
    }

    if (o.seed == "random") {
        std::random_device device;
        o.seed = std::to_string((static_cast<std::uint64_t>(device()) << 32) ^ device());
        spdlog::info("seed {}", o.seed);
    }

    try {
        if (*synth) return run_synth(o);
        if (*detect) return run_detect(o);
        if (*repeat) return run_repeat(o);
        if (*ablate) return run_ablate(o);
        if (*bench) return run_bench(o);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ced::Error& e) {
        spdlog::error("{}", e.what());
        return 1;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 2;
}
