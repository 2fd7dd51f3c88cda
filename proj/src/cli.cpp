#include "perspcrop/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "perspcrop/diffcheck.hpp"
#include "perspcrop/errors.hpp"
#include "perspcrop/focal_compare.hpp"
#include "perspcrop/image_warp.hpp"
#include "perspcrop/io.hpp"
#include "perspcrop/lifting.hpp"
#include "perspcrop/manifest.hpp"
#include "perspcrop/synthetic.hpp"

namespace perspcrop::cli {

namespace fs = std::filesystem;

namespace {

std::vector<double> parse_list(const std::string& s, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || !std::isfinite(v))
            throw InvalidArgument(flag + ": '" + item + "' is not a number");
        out.push_back(v);
    }
    if (out.empty()) throw InvalidArgument(flag + ": expected a comma-separated list");
    return out;
}

Eigen::Vector2d parse_pair(const std::string& s, const std::string& flag) {
    const auto v = parse_list(s, flag);
    if (v.size() != 2) throw InvalidArgument(flag + ": expected two values a,b");
    return {v[0], v[1]};
}

std::vector<int> parse_int_list(const std::string& s, const std::string& flag) {
    std::vector<int> out;
    for (double v : parse_list(s, flag)) {
        if (v != std::floor(v) || v < 1 || v > 1e6) throw InvalidArgument(flag + ": expected positive integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

nlohmann::json read_json_file(const fs::path& path) {
    try {
        return nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
}

TrainConfig read_config(const fs::path& path) {
    try {
        return TrainConfig::from_json(read_json_file(path));
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
}

LiftingModel read_model(const fs::path& path) {
    try {
        return LiftingModel::from_json(read_json_file(path));
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
}

std::vector<LabeledPose> read_dataset(const fs::path& path) {
    try {
        return from_records(read_pose_jsonl(path));
    } catch (const InvalidArgument& e) {
        const std::string msg = e.what();
        if (msg.rfind(path.string(), 0) == 0) throw;
        throw InvalidArgument(path.string() + ": " + msg);
    }
}

// Shared by every command that writes files.
struct Outputs {
    RunManifest manifest;
    std::string manifest_path;
    std::vector<fs::path> files;

    void text(const fs::path& p, const std::string& contents) {
        write_file_atomic(p, contents);
        files.push_back(p);
    }
    void image(const fs::path& p, const Image& img) {
        write_pnm(p, img);
        files.push_back(p);
    }
    void finish(const fs::path& primary) {
        for (const auto& f : files) manifest.add_output(f);
        manifest.config_hash = hex64(fnv1a64(manifest.config.dump()));
        manifest.finished = utc_timestamp();
        manifest.write(manifest_path.empty() ? fs::path(primary.string() + ".manifest.json")
                                             : fs::path(manifest_path));
    }
};

std::string table_number(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << v;
    return os.str();
}

struct Command {
    CLI::App* app = nullptr;
    std::function<void(std::ostream&, Outputs&)> body;
};

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Perspective crop layers: geometry, warping and lifting experiments", "perspcrop"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    std::string manifest_path;

    // warp-image
    std::string camera_path, p_str, s_str, option = "C", size_str, in_path, out_path;
    bool pixels = false, preserve_aspect = false;
    auto* wi = app.add_subcommand("warp-image", "Perspective crop of a P5/P6 image");
    wi->add_option("--camera", camera_path, "Camera JSON")->required();
    wi->add_option("--p", p_str, "Crop center u,v (normalized; pixels with --pixels)")->required();
    wi->add_option("--s", s_str, "Crop scale sx,sy (fraction of the image; pixels with --pixels)")->required();
    wi->add_option("--option", option, "Focal option A, B or C");
    wi->add_option("--size", size_str, "Output size HxW (default: input size)");
    wi->add_flag("--pixels", pixels, "Interpret --p and --s in pixels");
    wi->add_flag("--preserve-aspect", preserve_aspect, "Use min(f_virt) on both axes");
    wi->add_option("--manifest", manifest_path, "Manifest path");
    wi->add_option("input", in_path, "Input image")->required();
    wi->add_option("output", out_path, "Output image")->required();

    // warp-keypoints / warp-sequence
    std::string input_path, output_path;
    double margin = 0.1;
    auto* wk = app.add_subcommand("warp-keypoints", "Perspective crop of each pose in a JSONL file");
    auto* ws = app.add_subcommand("warp-sequence", "One shared perspective crop for a pose sequence");
    for (auto* sc : {wk, ws}) {
        sc->add_option("--camera", camera_path, "Camera JSON")->required();
        sc->add_option("--input", input_path, "Pose JSONL")->required();
        sc->add_option("--output", output_path, "Output pose JSONL")->required();
        sc->add_option("--option", option, "Focal option A, B or C");
        sc->add_option("--margin", margin, "Bounding box margin");
        sc->add_flag("--preserve-aspect", preserve_aspect, "Use min(f_virt) on both axes");
        sc->add_option("--manifest", manifest_path, "Manifest path");
    }

    // gen
    std::string kind = "figure", placement = "general", images_dir;
    std::size_t count = 1000;
    std::uint64_t seed = 0;
    int image_size = 256;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
    gen->add_option("--kind", kind, "figure or cube");
    gen->add_option("--placement", placement, "centered or general");
    gen->add_option("--count", count, "Number of samples");
    gen->add_option("--seed", seed, "Random seed");
    gen->add_option("--camera", camera_path, "Camera JSON (default: built-in camera)");
    gen->add_option("--images", images_dir, "Directory for rendered P6 images (cubes only)");
    gen->add_option("--image-size", image_size, "Rendered image side length");
    gen->add_option("--output", output_path, "Output pose JSONL")->required();
    gen->add_option("--manifest", manifest_path, "Manifest path");

    // train
    std::string config_path, data_path, model_path, curve_path;
    std::optional<std::uint64_t> seed_override;
    auto* tr = app.add_subcommand("train", "Train a lifting network");
    tr->add_option("--config", config_path, "TrainConfig JSON")->required();
    tr->add_option("--camera", camera_path, "Camera JSON")->required();
    tr->add_option("--data", data_path, "Training pose JSONL")->required();
    tr->add_option("--model", model_path, "Output model JSON")->required();
    tr->add_option("--curve", curve_path, "Loss curve CSV");
    tr->add_option("--seed", seed_override, "Override the config seed");
    tr->add_option("--manifest", manifest_path, "Manifest path");

    // eval
    std::string report_path, rotation_str;
    std::optional<double> focal_multiplier;
    auto* ev = app.add_subcommand("eval", "Evaluate a lifting network");
    ev->add_option("--model", model_path, "Model JSON")->required();
    ev->add_option("--camera", camera_path, "Camera JSON")->required();
    ev->add_option("--data", data_path, "Test pose JSONL")->required();
    ev->add_option("--report", report_path, "Per-sample CSV report")->required();
    ev->add_option("--focal-multiplier", focal_multiplier, "Scale the focal length at test time");
    ev->add_option("--rotation", rotation_str, "none, x_only or xy_full (RC models)");
    ev->add_option("--manifest", manifest_path, "Manifest path");

    // sweep-focal
    std::string multipliers_str = "0.5,0.7,1.0,1.5,2.0";
    auto* sf = app.add_subcommand("sweep-focal", "MPJPE under a misestimated focal length");
    sf->add_option("--model", model_path, "Model JSON")->required();
    sf->add_option("--camera", camera_path, "Camera JSON")->required();
    sf->add_option("--data", data_path, "Test pose JSONL")->required();
    sf->add_option("--multipliers", multipliers_str, "Comma-separated focal multipliers");
    sf->add_option("--output", output_path, "Output CSV")->required();
    sf->add_option("--manifest", manifest_path, "Manifest path");

    // sweep-capacity
    std::string train_path, test_path, widths_str;
    auto* sc = app.add_subcommand("sweep-capacity", "RC at full width vs PCL at each width");
    sc->add_option("--config", config_path, "TrainConfig JSON")->required();
    sc->add_option("--camera", camera_path, "Camera JSON")->required();
    sc->add_option("--train", train_path, "Training pose JSONL")->required();
    sc->add_option("--test", test_path, "Test pose JSONL")->required();
    sc->add_option("--widths", widths_str, "Comma-separated hidden widths")->required();
    sc->add_option("--output", output_path, "Output CSV")->required();
    sc->add_option("--manifest", manifest_path, "Manifest path");

    // ablate-rotation
    auto* ar = app.add_subcommand("ablate-rotation", "Rotate RC predictions post hoc");
    ar->add_option("--model", model_path, "RC model JSON")->required();
    ar->add_option("--camera", camera_path, "Camera JSON")->required();
    ar->add_option("--data", data_path, "Test pose JSONL")->required();
    ar->add_option("--output", output_path, "Output CSV")->required();
    ar->add_option("--manifest", manifest_path, "Manifest path");

    // bin-errors
    int bins = 8;
    double max_distance = 0.0;
    auto* be = app.add_subcommand("bin-errors", "MPJPE binned by distance from the image center");
    be->add_option("--report", report_path, "Per-sample CSV written by eval")->required();
    be->add_option("--bins", bins, "Number of bins");
    be->add_option("--max-distance", max_distance, "Upper bin edge (default: largest distance)");
    be->add_option("--output", output_path, "Output CSV")->required();
    be->add_option("--manifest", manifest_path, "Manifest path");

    // gradcheck
    GradcheckOptions gopts;
    auto* gc = app.add_subcommand("gradcheck", "Compare analytic Jacobians to finite differences");
    gc->add_option("--seed", gopts.seed, "Random seed");
    gc->add_option("--configs", gopts.geometry_configs, "Random geometry configurations");

    // compare-focal-options
    int grid = 5;
    double extent = 0.7;
    std::string cs_str = "0.2,0.2";
    auto* cf = app.add_subcommand("compare-focal-options", "Crop scale at the patch center per focal option");
    cf->add_option("--camera", camera_path, "Camera JSON")->required();
    cf->add_option("--grid", grid, "Targets per axis");
    cf->add_option("--extent", extent, "Targets span [-extent, extent] on the camera plane");
    cf->add_option("--s", cs_str, "Crop scale sx,sy");
    cf->add_option("--output", output_path, "Output CSV")->required();
    cf->add_option("--manifest", manifest_path, "Manifest path");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    }

    Outputs o;
    o.manifest_path = manifest_path;
    o.manifest.argv = args;
    o.manifest.started = utc_timestamp();

    try {
        const CLI::App* sub = app.get_subcommands().front();
        o.manifest.command = sub->get_name();
        nlohmann::ordered_json& cfg = o.manifest.config;

        if (sub == wi) {
            const CameraIntrinsics cam = read_camera_json(camera_path);
            const Image img = read_pnm(in_path);
            Eigen::Vector2d p = parse_pair(p_str, "--p"), s = parse_pair(s_str, "--s");
            if (pixels) {
                p = pixel_to_normalized(PixelPoint::from(p), cam).vec();
                s = {s.x() / cam.width(), s.y() / cam.height()};
            }
            int oh = img.height(), ow = img.width();
            if (!size_str.empty()) {
                int h = 0, w = 0;
                char x = 0, extra = 0;
                if (std::sscanf(size_str.c_str(), "%d%c%d%c", &h, &x, &w, &extra) != 3 || x != 'x' ||
                    h < 1 || w < 1)
                    throw InvalidArgument("--size: expected HxW with positive integers");
                oh = h;
                ow = w;
            }
            const PlanePoint q = backproject(ImagePoint::from(p), cam);
            const FocalOption opt = parse_focal_option(option);
            const ImageCrop crop = perspective_crop_image(img, cam, CropTarget({q.x, q.y}, s), opt,
                                                          oh, ow, preserve_aspect);
            cfg = {{"camera", nlohmann::ordered_json::parse(camera_to_json_text(cam))},
                   {"p", {p.x(), p.y()}}, {"s", {s.x(), s.y()}}, {"option", to_string(opt)},
                   {"size", {oh, ow}}, {"preserve_aspect", preserve_aspect}};
            o.image(out_path, crop.image);
            o.finish(out_path);
            return kExitOk;
        }

        if (sub == wk || sub == ws) {
            const CameraIntrinsics cam = read_camera_json(camera_path);
            auto recs = read_pose_jsonl(input_path);
            KeypointCropOptions kopts;
            kopts.focal = parse_focal_option(option);
            kopts.margin = margin;
            kopts.preserve_aspect = preserve_aspect;
            auto to_virtual = [](const Pose3D& p, const VirtualCamera& vc) {
                return pcl_inv(p, VirtualCamera{vc.rotation.transpose(), vc.intr, vc.target});
            };
            std::vector<PoseRecord> result;
            if (sub == wk) {
                for (const auto& r : recs) {
                    const KeypointCrop c = pcl_keypoints(r.pose2d, cam, kopts);
                    PoseRecord w{c.pose, std::nullopt};
                    if (r.pose3d) w.pose3d = to_virtual(*r.pose3d, c.camera);
                    result.push_back(std::move(w));
                }
            } else {
                std::vector<Pose2D> seq;
                for (const auto& r : recs) seq.push_back(r.pose2d);
                const SequenceCrop c = pcl_keypoint_sequence(seq, cam, kopts);
                for (std::size_t i = 0; i < recs.size(); ++i) {
                    PoseRecord w{c.poses[i], std::nullopt};
                    if (recs[i].pose3d) w.pose3d = to_virtual(*recs[i].pose3d, c.camera);
                    result.push_back(std::move(w));
                }
            }
            cfg = {{"camera", nlohmann::ordered_json::parse(camera_to_json_text(cam))},
                   {"input", input_path}, {"option", to_string(kopts.focal)}, {"margin", margin},
                   {"preserve_aspect", preserve_aspect}};
            o.text(output_path, write_pose_jsonl(result));
            o.finish(output_path);
            return kExitOk;
        }

        if (sub == gen) {
            if (kind != "figure" && kind != "cube")
                throw InvalidArgument("--kind: expected figure or cube");
            DatasetSpec spec = kind == "cube" ? DatasetSpec::cube_defaults() : DatasetSpec::figure_defaults();
            spec.count = count;
            spec.seed = seed;
            spec.placement = parse_placement(placement);
            if (!camera_path.empty()) spec.camera = read_camera_json(camera_path);
            if (!images_dir.empty() && kind != "cube")
                throw InvalidArgument("--images is only supported for cubes");
            if (image_size < 1) throw InvalidArgument("--image-size must be positive");
            spec.validate();
            cfg = {{"kind", kind}, {"placement", placement}, {"count", count}, {"seed", seed},
                   {"camera", nlohmann::ordered_json::parse(camera_to_json_text(spec.camera))}};
            o.manifest.seed = seed;
            std::vector<LabeledPose> data;
            if (kind == "cube") {
                const auto cubes = gen_cube_dataset(spec);
                for (std::size_t i = 0; i < cubes.size(); ++i) {
                    data.push_back(cubes[i].label);
                    if (!images_dir.empty()) {
                        char name[32];
                        std::snprintf(name, sizeof name, "%06zu.ppm", i);
                        o.image(fs::path(images_dir) / name,
                                rasterize_cube(cubes[i].cube, spec.camera, image_size, image_size));
                    }
                }
                if (!images_dir.empty()) cfg["image_size"] = image_size;
            } else {
                data = gen_figure_dataset(spec);
            }
            o.text(output_path, write_pose_jsonl(to_records(data)));
            o.finish(output_path);
            return kExitOk;
        }

        if (sub == tr) {
            TrainConfig c = read_config(config_path);
            if (seed_override) c.seed = *seed_override;
            const CameraIntrinsics cam = read_camera_json(camera_path);
            const auto data = read_dataset(data_path);
            cfg = {{"train", c.to_json()}, {"data", data_path},
                   {"camera", nlohmann::ordered_json::parse(camera_to_json_text(cam))}};
            o.manifest.seed = c.seed;
            const TrainResult r = train(data, cam, c);
            o.text(model_path, r.model.to_json().dump() + "\n");
            if (!curve_path.empty()) {
                std::ostringstream csv;
                csv.precision(17);
                csv << "epoch,train_loss,val_loss\n";
                for (const auto& e : r.curve) csv << e.epoch << ',' << e.train_loss << ',' << e.val_loss << '\n';
                o.text(curve_path, csv.str());
            }
            out << "trained " << to_string(c.preprocessing) << " model, best epoch " << r.best_epoch
                << ", val loss " << table_number(r.curve.empty() ? 0.0 : r.curve[r.best_epoch > 0 ? r.best_epoch - 1 : 0].val_loss)
                << " mm^2\n";
            o.finish(model_path);
            return kExitOk;
        }

        if (sub == ev) {
            const LiftingModel m = read_model(model_path);
            const CameraIntrinsics cam = read_camera_json(camera_path);
            const auto data = read_dataset(data_path);
            EvalOptions eo;
            eo.focal_multiplier = focal_multiplier.value_or(m.config.focal_multiplier);
            eo.rotation = rotation_str.empty() ? m.config.rotation : parse_rotation_mode(rotation_str);
            if (eo.rotation != RotationMode::None && m.config.preprocessing != Preprocessing::RC)
                throw InvalidArgument("--rotation applies to RC models only");
            cfg = {{"model", model_path}, {"data", data_path}, {"focal_multiplier", eo.focal_multiplier},
                   {"rotation", to_string(eo.rotation)}};
            o.manifest.seed = m.config.seed;
            const EvalReport r = evaluate(m, data, cam, eo);
            o.text(report_path, r.to_csv());
            out << "MPJPE " << table_number(r.mpjpe) << " mm  PCK@50 " << table_number(r.pck50)
                << "  PCK@100 " << table_number(r.pck100) << "\n";
            o.finish(report_path);
            return kExitOk;
        }

        if (sub == sf) {
            const LiftingModel m = read_model(model_path);
            const CameraIntrinsics cam = read_camera_json(camera_path);
            const auto data = read_dataset(data_path);
            const auto mult = parse_list(multipliers_str, "--multipliers");
            for (double v : mult)
                if (!(v > 0.0)) throw InvalidArgument("--multipliers must be positive");
            cfg = {{"model", model_path}, {"data", data_path}, {"multipliers", mult}};
            o.manifest.seed = m.config.seed;
            const auto rows = focal_robustness_sweep(m, data, cam, mult);
            o.text(output_path, focal_sweep_csv(rows));
            out << "multiplier  MPJPE(mm)\n";
            for (const auto& r : rows) out << std::setw(10) << r.multiplier << "  " << table_number(r.mpjpe) << "\n";
            o.finish(output_path);
            return kExitOk;
        }

        if (sub == sc) {
            const TrainConfig c = read_config(config_path);
            const CameraIntrinsics cam = read_camera_json(camera_path);
            const auto widths = parse_int_list(widths_str, "--widths");
            const auto trd = read_dataset(train_path);
            const auto ted = read_dataset(test_path);
            cfg = {{"train", c.to_json()}, {"train_data", train_path}, {"test_data", test_path},
                   {"widths", widths}};
            o.manifest.seed = c.seed;
            const auto rows = capacity_sweep(trd, ted, cam, c, widths);
            o.text(output_path, capacity_csv(rows));
            out << "mode  width  params    MPJPE(mm)\n";
            for (const auto& r : rows)
                out << std::setw(4) << to_string(r.mode) << "  " << std::setw(5) << r.width << "  "
                    << std::setw(8) << r.parameters << "  " << table_number(r.mpjpe) << "\n";
            o.finish(output_path);
            return kExitOk;
        }

        if (sub == ar) {
            const LiftingModel m = read_model(model_path);
            if (m.config.preprocessing != Preprocessing::RC)
                throw InvalidArgument(model_path + ": rotation ablation needs an RC model");
            const CameraIntrinsics cam = read_camera_json(camera_path);
            const auto data = read_dataset(data_path);
            cfg = {{"model", model_path}, {"data", data_path}};
            o.manifest.seed = m.config.seed;
            std::ostringstream csv;
            csv.precision(17);
            csv << "rotation,mpjpe_mm,pck50,pck100\n";
            for (RotationMode mode : {RotationMode::None, RotationMode::XOnly, RotationMode::XYFull}) {
                const EvalReport r = rotation_ablation(m, data, cam, mode);
                csv << to_string(mode) << ',' << r.mpjpe << ',' << r.pck50 << ',' << r.pck100 << '\n';
                out << std::setw(8) << to_string(mode) << "  " << table_number(r.mpjpe) << " mm\n";
            }
            o.text(output_path, csv.str());
            o.finish(output_path);
            return kExitOk;
        }

        if (sub == be) {
            // Re-read the per-sample report written by eval.
            const std::string text = read_text_file(report_path);
            std::istringstream is(text);
            std::string line;
            if (!std::getline(is, line) || line != "sample,root_u,root_v,mpjpe_mm")
                throw InvalidArgument(report_path + ": not a per-sample eval report");
            EvalReport r;
            std::size_t lineno = 1;
            while (std::getline(is, line)) {
                ++lineno;
                if (line.empty()) continue;
                std::vector<double> v;
                try {
                    v = parse_list(line, "row");
                } catch (const InvalidArgument&) {
                    v.clear();
                }
                if (v.size() != 4)
                    throw InvalidArgument(report_path + ":" + std::to_string(lineno) + ": malformed row");
                r.root_position.push_back({v[1], v[2]});
                r.per_sample.push_back(v[3]);
            }
            cfg = {{"report", report_path}, {"bins", bins}, {"max_distance", max_distance}};
            const BinnedErrors b = binned_error_analysis(r, bins, max_distance);
            o.text(output_path, b.to_csv());
            out << "distance bin      count  MPJPE(mm)\n";
            for (const auto& x : b.bins)
                out << table_number(x.lo) << "-" << table_number(x.hi) << "  " << std::setw(6) << x.count
                    << "  " << table_number(x.mean_mpjpe) << "\n";
            out << "slope " << table_number(b.slope) << " mm per unit distance\n";
            o.finish(output_path);
            return kExitOk;
        }

        if (sub == gc) {
            if (gopts.geometry_configs < 1) throw InvalidArgument("--configs must be positive");
            const auto entries = run_gradcheck(gopts);
            bool ok = true;
            for (const auto& e : entries) {
                out << std::left << std::setw(26) << e.name << std::right << " max rel err "
                    << std::scientific << std::setprecision(3) << e.max_rel_error << " (tol "
                    << e.tolerance << ", " << std::defaultfloat << e.checked << " entries) "
                    << (e.passed() ? "ok" : "FAIL") << "\n";
                ok = ok && e.passed();
            }
            return ok ? kExitOk : kExitFailure;
        }

        if (sub == cf) {
            const CameraIntrinsics cam = read_camera_json(camera_path);
            const Eigen::Vector2d s = parse_pair(cs_str, "--s");
            const auto targets = target_grid(grid, extent);
            const FocalComparison cmp = compare_focal_options(cam, targets, s);
            cfg = {{"camera", nlohmann::ordered_json::parse(camera_to_json_text(cam))},
                   {"grid", grid}, {"extent", extent}, {"s", {s.x(), s.y()}}};
            o.text(output_path, cmp.to_csv());
            for (FocalOption opt : {FocalOption::A, FocalOption::B, FocalOption::C})
                out << "option " << to_string(opt) << ": "
                    << (cmp.preserved[static_cast<int>(opt)] ? "preserves" : "does not preserve")
                    << " scale within 1% on all targets\n";
            o.finish(output_path);
            return kExitOk;
        }
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const DegenerateBoundingBox& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitInvalid;
}

} // namespace perspcrop::cli
