// Seed sweep over the multicast short-video slicing scenario; writes
// metrics.csv and summary.csv (plus trace.csv and UDT snapshots with --trace).

#include "dtvs/domain.hpp"
#include "dtvs/error.hpp"
#include "dtvs/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace
{

std::vector<std::uint64_t>
parse_seeds(const std::string& spec)
{
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        const auto dots = item.find("..");
        if (dots != std::string::npos)
        {
            const std::uint64_t lo = std::stoull(item.substr(0, dots));
            const std::uint64_t hi = std::stoull(item.substr(dots + 2));
            if (hi < lo)
            {
                throw std::invalid_argument("empty seed range " + item);
            }
            for (std::uint64_t s = lo; s <= hi; ++s)
            {
                seeds.push_back(s);
            }
        }
        else if (!item.empty())
        {
            seeds.push_back(std::stoull(item));
        }
    }
    if (seeds.empty())
    {
        throw std::invalid_argument("no seeds given");
    }
    return seeds;
}

std::vector<dtvs::SchemeId>
parse_schemes(const std::string& spec)
{
    std::vector<dtvs::SchemeId> schemes;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        if (!item.empty())
        {
            schemes.push_back(dtvs::parse_scheme(item));
        }
    }
    return schemes;
}

void
write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
    {
        throw dtvs::Error(dtvs::ErrorCode::Io, "cannot write " + path.string());
    }
    f << content;
}

} // namespace

int
main(int argc, char** argv)
{
    CLI::App app{"Digital-twin-assisted multicast short-video slicing simulator"};
    std::string config_path;
    std::string schemes_arg;
    std::string seeds_arg;
    std::string out_dir = "out";
    bool trace = false;
    bool print_config = false;
    app.add_option("--config", config_path, "scenario JSON; defaults when omitted");
    app.add_option("--schemes", schemes_arg, "comma-separated: proposed, optimization, heuristic; defaults to the scenario's algorithm");
    app.add_option("--seeds", seeds_arg, "list and ranges, e.g. 0..9 or 1,4,7; defaults to the scenario's seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--trace", trace, "also write per-user traces and UDT snapshots");
    app.add_flag("--print-config", print_config, "print the effective scenario as JSON and exit");
    CLI11_PARSE(app, argc, argv);

    try
    {
        const dtvs::ScenarioConfig config =
            config_path.empty() ? dtvs::validate_scenario(nlohmann::json::object()) : dtvs::load_scenario_file(config_path);
        if (print_config)
        {
            std::cout << dtvs::scenario_to_json(config).dump(2) << '\n';
            return 0;
        }
        const auto schemes = schemes_arg.empty() ? std::vector<dtvs::SchemeId>{config.algorithm} : parse_schemes(schemes_arg);
        const auto seeds = seeds_arg.empty() ? std::vector<std::uint64_t>{config.seed} : parse_seeds(seeds_arg);

        dtvs::RunOptions options;
        options.trace = trace;
        const dtvs::RunMetrics metrics = dtvs::run_experiment(config, schemes, seeds, options);

        const std::filesystem::path dir(out_dir);
        std::filesystem::create_directories(dir);
        std::ostringstream m;
        dtvs::write_metrics_csv(m, metrics);
        write_file(dir / "metrics.csv", m.str());
        if (!metrics.windows.empty())
        {
            std::ostringstream s;
            dtvs::write_summary_csv(s, metrics);
            write_file(dir / "summary.csv", s.str());
        }
        if (trace)
        {
            std::ostringstream t;
            dtvs::write_trace_csv(t, metrics);
            write_file(dir / "trace.csv", t.str());
            std::size_t i = 0;
            for (dtvs::SchemeId scheme : schemes)
            {
                for (std::uint64_t seed : seeds)
                {
                    const bool failed = std::any_of(metrics.errors.begin(), metrics.errors.end(), [&](const auto& e) {
                        return e.scheme == scheme && e.seed == seed;
                    });
                    if (failed || i >= metrics.udt_snapshots.size())
                    {
                        continue;
                    }
                    const std::string name =
                        "udt_" + std::string(dtvs::to_string(scheme)) + "_" + std::to_string(seed) + ".csv";
                    write_file(dir / name, metrics.udt_snapshots[i++]);
                }
            }
        }
        for (const auto& e : metrics.errors)
        {
            std::cerr << dtvs::to_string(e.scheme) << " seed " << e.seed << ": " << e.message << "\n";
        }
        return metrics.errors.empty() ? 0 : 1;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
