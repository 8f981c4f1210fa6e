#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "corrugate/export.hpp"
#include "corrugate/scene.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ripple / flattening / normal-deformation engine"};
    app.require_subcommand(1);

    std::string scene_path, out_dir = ".", report_path, what = "mesh";
    unsigned long long seed = 0;
    int grid = 0;

    auto* run = app.add_subcommand("run", "execute a scene and write a report");
    run->add_option("scene", scene_path, "scene file")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed, "override the scene seed");
    run->add_option("--grid", grid, "override the grid resolution");
    run->add_option("--report", report_path, "report file path");

    auto* validate = app.add_subcommand("validate", "parse and check a scene");
    validate->add_option("scene", scene_path, "scene file")->required();

    auto* exp = app.add_subcommand("export", "export the scene's input embedding");
    exp->add_option("scene", scene_path, "scene file")->required();
    exp->add_option("--what", what, "mesh|polyline|angles")->required();
    exp->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        corrugate::Scene scene = corrugate::parse_scene(read_file(scene_path));
        if (validate->parsed()) {
            std::cout << "ok: " << scene.pipeline << " scene" << std::endl;
            return 0;
        }
        if (exp->parsed()) {
            corrugate::Embedding e = corrugate::build_scene_embedding(scene);
            std::filesystem::create_directories(out_dir);
            if (what == "mesh") {
                corrugate::export_mesh(e, out_dir + "/mesh.obj");
            } else if (what == "polyline") {
                corrugate::export_polyline(e, out_dir + "/polyline.csv");
            } else if (what == "angles") {
                corrugate::VerticalSplit split =
                    scene.split
                        ? corrugate::VerticalSplit(scene.split->first,
                                                   scene.split->second)
                        : corrugate::VerticalSplit(e.ambient_dim() - 1, 1);
                corrugate::export_angle_map(e, split, out_dir + "/angles.csv",
                                            out_dir + "/angles.svg");
            } else {
                std::cerr << "unknown export kind: " << what << std::endl;
                return 2;
            }
            return 0;
        }
        // run
        corrugate::Config cfg = corrugate::Config::from_env();
        if (seed) scene.seed = seed;
        if (grid) scene.grid = grid;
        std::filesystem::create_directories(out_dir);
        corrugate::RunReport report = corrugate::run_scene(scene, out_dir, cfg);
        const std::string path =
            report_path.empty() ? out_dir + "/report.json" : report_path;
        corrugate::write_atomic(path, report.text);
        std::cout << (report.all_pass ? "PASS" : "FAIL") << ": report at " << path
                  << std::endl;
        return report.all_pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
}
