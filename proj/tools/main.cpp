#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrl/errors.hpp"
#include "mrl/evalstats.hpp"
#include "mrl/kernels.hpp"
#include "mrl/perception.hpp"
#include "mrl/presets.hpp"
#include "mrl/reasoning.hpp"
#include "mrl/scene.hpp"
#include "mrl/solver.hpp"
#include "mrl/svg_render.hpp"

namespace {

using nlohmann::json;

// Exit codes: 0 success, 1 usage, 2 input/format, 3 provider/transport,
// 4 infeasible optimization.
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitProvider = 3;
constexpr int kExitInfeasible = 4;

struct OptimizeArgs {
    std::string scene_file;
    std::string preset;
    std::string weights_file;
    std::string entities_file;
    std::uint64_t seed = 0;
    int grid = 5;
    bool clip_rays = false;
    int restarts = 8;
    int iterations = 2000;
    std::vector<double> bounds;  // cx cy cz hx hy hz
    std::string out;
    std::string report_file;
    std::string trace_file;
    std::string svg_file;
};

int cmd_optimize(const OptimizeArgs& args) {
    if (args.preset.empty() == args.weights_file.empty())
        throw mrl::UsageError("optimize: pass exactly one of --preset or --weights-file");
    const mrl::WeightConfig weights = args.preset.empty()
                                          ? mrl::load_weights(mrl::read_file(args.weights_file))
                                          : mrl::preset_weights(args.preset);

    mrl::Scene scene = mrl::load_scene(mrl::read_file(args.scene_file));
    if (!args.entities_file.empty())
        scene = mrl::Scene::validated(scene.user,
                                      mrl::load_entities(mrl::read_file(args.entities_file)),
                                      scene.elements);

    mrl::ObjectiveParams params;
    params.grid_n = args.grid;
    params.clip_at_element = args.clip_rays;

    mrl::SolverConfig config;
    config.seed = args.seed;
    config.restarts = args.restarts;
    config.iterations = args.iterations;
    if (!args.bounds.empty()) {
        if (args.bounds.size() != 6)
            throw mrl::UsageError("optimize: --bounds takes cx cy cz hx hy hz");
        config.bounds = mrl::Box3{{args.bounds[0], args.bounds[1], args.bounds[2]},
                                  {args.bounds[3], args.bounds[4], args.bounds[5]}};
    }

    const mrl::SolveResult result = mrl::optimize(scene, weights, params, config);
    mrl::write_file(args.out, mrl::save_layout(result.layout, scene));

    if (!args.trace_file.empty()) {
        std::string trace;
        char line[64];
        for (const mrl::TracePoint& t : result.trace) {
            std::snprintf(line, sizeof(line), "%d %.17g\n", t.iteration, t.best_q);
            trace += line;
        }
        mrl::write_file(args.trace_file, trace);
    }
    if (!args.report_file.empty()) {
        json j;
        j["total"] = result.report.total;
        j["best_restart"] = result.best_restart;
        for (const auto& e : result.report.elements) {
            json je;
            for (int t = 0; t < mrl::kTermCount; ++t)
                je["terms"][mrl::kTermNames[t]] = e.costs[t];
            je["weighted"] = e.weighted;
            j["elements"][e.element_id] = je;
        }
        mrl::write_file(args.report_file, j.dump(2) + "\n");
    }
    if (!args.svg_file.empty())
        mrl::write_file(args.svg_file, mrl::render_svg(scene, result.layout, mrl::ViewKind::top));

    std::printf("Q = %.9g (restart %d)\n", result.report.total, result.best_restart);
    for (const auto& e : result.report.elements) {
        const mrl::Vec3 p = result.layout.position_of(e.element_id);
        std::printf("  %s: (%.4f, %.4f, %.4f) weighted %.6g\n", e.element_id.c_str(), p.x, p.y,
                    p.z, e.weighted);
    }
    return 0;
}

struct SegmentArgs {
    std::string cloud_file;
    std::string camera_file;
    std::string detections_file;
    std::string out;
    double iou = 0.5;
    double eps = 0.1;
    int min_pts = 10;
    double near = 0.2;
    double far = 10.0;
};

int cmd_segment(const SegmentArgs& args) {
    const mrl::PointCloud cloud = mrl::load_point_cloud(mrl::read_file(args.cloud_file));
    const mrl::CameraModel cam = mrl::load_camera(mrl::read_file(args.camera_file));
    const auto detections = mrl::load_detections(mrl::read_file(args.detections_file), cam);

    mrl::SegmentParams params;
    params.iou_threshold = args.iou;
    params.eps = args.eps;
    params.min_pts = args.min_pts;
    params.near = args.near;
    params.far = args.far;

    std::vector<mrl::PhysicalEntity> entities;
    std::map<std::string, int> appended;  // per-label id counter
    for (const mrl::Detection2D& det : detections) {
        auto candidate = mrl::segment_box(cloud, cam, det, params);
        if (!candidate) {
            std::fprintf(stderr, "segment: no object for detection '%s'\n", det.label.c_str());
            continue;
        }
        candidate->id = det.label + "_" + std::to_string(appended[det.label]);
        const std::size_t before = entities.size();
        entities = mrl::merge_detection(std::move(entities), *candidate, params.iou_threshold);
        if (entities.size() > before) appended[det.label]++;
    }
    mrl::write_file(args.out, mrl::save_entities(entities));
    std::printf("segmented %zu entities from %zu detections\n", entities.size(),
                detections.size());
    return 0;
}

struct RateArgs {
    std::string image;
    std::string areas_file;
    std::string mode = "overlay";
    int instances = 1;
    std::string provider = "mock";
    std::string fixtures_file;
    std::string links_file;
    std::string few_shot_file;
    bool monitor_refinement = false;
    std::string entities_file;
    std::string entities_out;
    std::string out;
};

mrl::RatingQuery load_query(const RateArgs& args) {
    mrl::RatingQuery query;
    query.mode = mrl::rating_mode_from_name(args.mode);
    query.image = args.image;
    query.monitor_refinement = args.monitor_refinement;

    const json ja = json::parse(mrl::read_file(args.areas_file));
    if (!ja.is_object() || !ja.contains("areas"))
        throw mrl::InputError("areas file: expected {\"areas\": [...]}");
    for (const auto& a : ja.at("areas")) {
        mrl::AreaAnnotation area;
        area.index = a.at("index").get<int>();
        if (a.contains("box")) {
            area.xmin = a.at("box")[0].get<double>();
            area.ymin = a.at("box")[1].get<double>();
            area.xmax = a.at("box")[2].get<double>();
            area.ymax = a.at("box")[3].get<double>();
        }
        if (a.contains("entity")) area.entity_id = a.at("entity").get<std::string>();
        query.areas.push_back(area);
    }

    if (!args.few_shot_file.empty()) {
        const json jf = json::parse(mrl::read_file(args.few_shot_file));
        if (!jf.is_object() || !jf.contains("examples"))
            throw mrl::InputError("few-shot file: expected {\"examples\": [...]}");
        for (const auto& ex : jf.at("examples")) {
            mrl::FewShotExample example;
            example.image = ex.at("image").get<std::string>();
            for (const auto& a : ex.at("areas")) {
                example.areas.push_back({a.at("index").get<int>(),
                                         a.at("median").get<double>(),
                                         a.at("sd").get<double>()});
            }
            query.few_shot.push_back(std::move(example));
        }
    }
    return query;
}

int cmd_rate(const RateArgs& args) {
    const mrl::RatingQuery query = load_query(args);

    std::unique_ptr<mrl::RatingProvider> provider;
    if (args.provider == "mock") {
        if (args.fixtures_file.empty())
            throw mrl::UsageError("rate: --provider mock requires --fixtures");
        provider = std::make_unique<mrl::MockProvider>(
            mrl::MockProvider::from_json(mrl::read_file(args.fixtures_file)));
    } else if (args.provider == "live") {
        provider = std::make_unique<mrl::HttpProvider>(mrl::HttpProviderConfig::from_env());
    } else {
        throw mrl::UsageError("rate: --provider must be mock or live");
    }

    int max_in_flight = 4;
    if (const char* cap = std::getenv("MRL_PROVIDER_MAX_IN_FLIGHT")) {
        max_in_flight = std::max(1, std::atoi(cap));
    }
    const auto responses =
        mrl::run_rating_instances(*provider, query, args.instances, max_in_flight);
    const auto aggregates = mrl::aggregate_ratings(responses);

    json j;
    j["image"] = args.image;
    j["mode"] = args.mode;
    j["instances"] = args.instances;
    j["areas"] = json::array();
    for (const auto& agg : aggregates) {
        json ja;
        ja["area"] = agg.area;
        ja["median"] = agg.median;
        ja["sd"] = agg.sd;
        ja["category_mode"] = mrl::category_name(agg.category_mode);
        j["areas"].push_back(ja);
    }
    mrl::write_file(args.out, j.dump(2) + "\n");

    if (!args.links_file.empty()) {
        if (args.entities_file.empty() || args.entities_out.empty())
            throw mrl::UsageError("rate: --links requires --entities and --entities-out");
        const json jl = json::parse(mrl::read_file(args.links_file));
        if (!jl.is_object() || !jl.contains("links"))
            throw mrl::InputError("links file: expected {\"links\": [...]}");
        std::map<int, std::string> links;
        for (const auto& l : jl.at("links"))
            links[l.at("area").get<int>()] = l.at("entity").get<std::string>();

        auto entities = mrl::load_entities(mrl::read_file(args.entities_file));
        const auto applied =
            mrl::apply_ratings(aggregates, links, std::move(entities), query.mode);
        for (const int area : applied.unlinked_areas)
            std::fprintf(stderr, "rate: area %d has no entity link\n", area);
        mrl::write_file(args.entities_out, mrl::save_entities(applied.entities));
    }
    std::printf("rated %zu areas over %d instances\n", aggregates.size(), args.instances);
    return 0;
}

struct AnalyzeArgs {
    std::string csv_file;
    int iterations = 2000;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_analyze(const AnalyzeArgs& args) {
    const auto matrices = mrl::load_rating_matrices(mrl::read_file(args.csv_file));
    json j;
    j["iterations"] = args.iterations;
    j["seed"] = args.seed;
    for (const auto& [question, matrix] : matrices) {
        const double p = mrl::bootstrap_population_test(matrix, args.iterations, args.seed);
        j["p_" + question] = p;
        if (matrix.has_categories()) {
            const auto mask = mrl::unsuitable_mask(matrix);
            j["mode_agreement"][question] =
                mrl::mode_agreement(mrl::cell_categories(matrix, false),
                                    mrl::cell_categories(matrix, true), mask);
        }
        json divergence;
        for (std::size_t r = 0; r < matrix.rater_count(); ++r)
            divergence[matrix.rater_ids[r]] = mrl::divergence_profile(matrix, r);
        j["divergence"][question] = divergence;
    }
    mrl::write_file(args.out, j.dump(2) + "\n");
    for (const auto& [question, matrix] : matrices)
        std::printf("%s: %zu raters x %zu cells, p = %.4f\n", question.c_str(),
                    matrix.rater_count(), matrix.cell_count(),
                    j["p_" + question].get<double>());
    return 0;
}

struct RenderArgs {
    std::string scene_file;
    std::string layout_file;
    std::string view = "top";
    std::string out;
};

int cmd_render(const RenderArgs& args) {
    const mrl::Scene scene = mrl::load_scene(mrl::read_file(args.scene_file));
    const mrl::Layout layout = mrl::load_layout(mrl::read_file(args.layout_file));
    mrl::write_file(args.out,
                    mrl::render_svg(scene, layout, mrl::view_from_name(args.view)));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Situation-aware MR layout pipeline: segment, rate, optimize, analyze, render"};
    app.require_subcommand(1);

    std::string kernel = "auto";
    app.add_option("--kernel", kernel, "Force the ray kernel ISA (auto|scalar|avx2)");

    OptimizeArgs opt;
    CLI::App* optimize = app.add_subcommand("optimize", "Minimize the layout objective");
    optimize->add_option("scene", opt.scene_file, "Scene JSON file")->required();
    optimize->add_option("--preset", opt.preset,
                         "Weight preset (user-centric|surface-adapt|situation-adapt)");
    optimize->add_option("--weights-file", opt.weights_file, "Weight config JSON");
    optimize->add_option("--entities", opt.entities_file,
                         "Replace scene entities with this entities file");
    optimize->add_option("--seed", opt.seed, "Solver seed");
    optimize->add_option("--grid", opt.grid, "Rays per element edge (grid_n)");
    optimize->add_flag("--clip-rays", opt.clip_rays,
                       "Clip suitability rays at the element instead of extending past it");
    optimize->add_option("--restarts", opt.restarts, "Annealing restarts");
    optimize->add_option("--iterations", opt.iterations, "Iterations per restart");
    optimize->add_option("--bounds", opt.bounds,
                         "Search bounds: center x y z, half extents x y z")
        ->expected(6);
    optimize->add_option("--out", opt.out, "Layout output file")->required();
    optimize->add_option("--report", opt.report_file, "Cost report JSON output");
    optimize->add_option("--trace", opt.trace_file, "Per-iteration best-Q trace");
    optimize->add_option("--svg", opt.svg_file, "Top-view SVG of the result");

    SegmentArgs seg;
    CLI::App* segment = app.add_subcommand("segment", "Segment 3D boxes from detections");
    segment->add_option("cloud", seg.cloud_file, "Point cloud (XYZ or ascii PLY)")->required();
    segment->add_option("camera", seg.camera_file, "Camera JSON")->required();
    segment->add_option("detections", seg.detections_file, "Detections JSON")->required();
    segment->add_option("--out", seg.out, "Entities output file")->required();
    segment->add_option("--iou", seg.iou, "Merge IoU threshold");
    segment->add_option("--eps", seg.eps, "DBSCAN eps (m)");
    segment->add_option("--min-pts", seg.min_pts, "DBSCAN min points");
    segment->add_option("--near", seg.near, "Frustum near plane (m)");
    segment->add_option("--far", seg.far, "Frustum far plane (m)");

    RateArgs rate;
    CLI::App* rate_cmd = app.add_subcommand("rate", "Query suitability ratings for areas");
    rate_cmd->add_option("image", rate.image, "Image reference (opaque id)")->required();
    rate_cmd->add_option("areas", rate.areas_file, "Areas JSON file")->required();
    rate_cmd->add_option("--mode", rate.mode, "overlay|interaction")->required();
    rate_cmd->add_option("--instances", rate.instances, "Number of rating instances");
    rate_cmd->add_option("--provider", rate.provider, "mock|live");
    rate_cmd->add_option("--fixtures", rate.fixtures_file, "Mock fixture JSON");
    rate_cmd->add_option("--links", rate.links_file, "Area-to-entity links JSON");
    rate_cmd->add_option("--few-shot", rate.few_shot_file, "Few-shot examples JSON");
    rate_cmd->add_flag("--monitor-refinement", rate.monitor_refinement,
                       "Append the monitor refinement sentence");
    rate_cmd->add_option("--entities", rate.entities_file, "Entities file to update");
    rate_cmd->add_option("--entities-out", rate.entities_out, "Updated entities output");
    rate_cmd->add_option("--out", rate.out, "Ratings output JSON")->required();

    AnalyzeArgs ana;
    CLI::App* analyze = app.add_subcommand("analyze", "Rater-comparison statistics");
    analyze->add_option("ratings", ana.csv_file, "Ratings CSV")->required();
    analyze->add_option("--iterations", ana.iterations, "Bootstrap iterations");
    analyze->add_option("--seed", ana.seed, "Bootstrap seed");
    analyze->add_option("--out", ana.out, "Report JSON output")->required();

    RenderArgs ren;
    CLI::App* render = app.add_subcommand("render", "Render scene + layout to SVG");
    render->add_option("scene", ren.scene_file, "Scene JSON file")->required();
    render->add_option("layout", ren.layout_file, "Layout JSON file")->required();
    render->add_option("--view", ren.view, "top|camera");
    render->add_option("--out", ren.out, "SVG output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (kernel == "scalar") {
            mrl::kernels::force_isa(mrl::kernels::Isa::scalar);
        } else if (kernel == "avx2") {
            mrl::kernels::force_isa(mrl::kernels::Isa::avx2);
        } else if (kernel != "auto") {
            throw mrl::UsageError("unknown --kernel '" + kernel + "'");
        }
        if (optimize->parsed()) return cmd_optimize(opt);
        if (segment->parsed()) return cmd_segment(seg);
        if (rate_cmd->parsed()) return cmd_rate(rate);
        if (analyze->parsed()) return cmd_analyze(ana);
        if (render->parsed()) return cmd_render(ren);
    } catch (const mrl::UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const mrl::ProviderError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitProvider;
    } catch (const mrl::InfeasibleError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInfeasible;
    } catch (const mrl::InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
    return 0;
}
