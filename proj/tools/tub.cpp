// tub - run bound-evaluation scenarios from a JSON config
#include "tub/errors.hpp"
#include "tub/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

int main(int argc, char** argv) {
    CLI::App app{"Thermal uncertainty bounds toolkit"};
    app.set_version_flag("--version", std::string(tub::kToolkitVersion));
    app.require_subcommand(1);

    std::string config, out_dir = ".", format = "csv", units = "natural";
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    auto* run = app.add_subcommand("run", "run every scenario in a config and write results");
    run->add_option("config", config, "config JSON")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

    auto* list = app.add_subcommand("list-evaluators", "list evaluators and the models they accept");

    auto* cons = app.add_subcommand("constants", "print the constants registry and reference scales");
    cons->add_option("--units", units, "si or natural")->check(CLI::IsMember({"si", "natural"}));

    auto* val = app.add_subcommand("validate", "check a config and echo it with defaults filled");
    val->add_option("config", config, "config JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            std::ifstream in(config);
            if (!in) throw tub::IoError("cannot open config '" + config + "'");
            const auto root = tub::json::parse(in);
            const auto sc = tub::parse_config(root);
            const auto m = tub::run(sc, jobs, tub::config_hash(root));
            tub::emit(m, out_dir, format);
            std::size_t bad = 0;
            for (const auto& s : m.scenarios)
                for (const auto& r : s.reports)
                    if (r.failed()) {
                        ++bad;
                        std::cerr << "FAILED " << s.name << " / " << r.name << " [" << tub::to_string(r.status) << "]";
                        if (r.metadata.contains("error")) std::cerr << ": " << r.metadata["error"].get<std::string>();
                        std::cerr << '\n';
                    }
            std::cerr << m.report_count() << " reports, " << bad << " failed\n";
            return bad ? 1 : 0;
        }
        if (*list) {
            for (const auto& e : tub::evaluator_registry()) {
                std::string models;
                for (const auto& k : e.models) models += (models.empty() ? "" : ",") + k;
                std::cout << e.name << "  [" << models << "]  " << e.summary << '\n';
            }
            return 0;
        }
        if (*cons) {
            std::cout << tub::constants_table(tub::units_from_string(units)).dump(2) << '\n';
            return 0;
        }
        if (*val) {
            std::cout << tub::echo_config(tub::load_config(config)).dump(2) << '\n';
            return 0;
        }
    } catch (const tub::json::parse_error& e) {
        std::cerr << "error: " << config << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
