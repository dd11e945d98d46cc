// netlens: mine a forum dump for ISP service insight — sentiment peaks,
// outage spikes, popular-post topics, and speed-test trend series.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "netlens/errors.hpp"
#include "netlens/fixture.hpp"
#include "netlens/pipeline.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::string out;
    long long seed = -1;
    bool no_svg = false;
    bool include_comments = false;
    bool no_provider_filter = false;
    double tau = -1;
    long long peak_k = -1;
    int min_separation = -1;
    double spike_z = -1;
    long long spike_min_count = -1;
    double percentile = -1;
    std::string provider;
    std::string isp;
};

void attach_options(CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.config_path, "run configuration JSON")->required();
    sub->add_option("--out", o.out, "output directory (overrides config)");
    sub->add_option("--seed", o.seed, "seed (overrides config)");
    sub->add_flag("--no-svg", o.no_svg, "skip the trend chart");
    sub->add_flag("--include-comments", o.include_comments,
                  "count comments in the daily sentiment series");
    sub->add_flag("--no-provider-filter", o.no_provider_filter,
                  "keep speed-test reports from any provider");
    sub->add_option("--tau", o.tau, "strong-sentiment threshold, in (0.5, 1]");
    sub->add_option("--peak-k", o.peak_k, "number of sentiment peaks to report");
    sub->add_option("--min-separation", o.min_separation, "days between reported peaks");
    sub->add_option("--spike-z", o.spike_z, "outage spike z-score threshold");
    sub->add_option("--spike-min-count", o.spike_min_count, "outage spike count floor");
    sub->add_option("--percentile", o.percentile, "popularity percentile");
    sub->add_option("--provider", o.provider, "sentiment provider: lexicon, remote, fixture");
    sub->add_option("--isp", o.isp, "ISP name for the speed-test provider filter");
}

int run_command(const std::string& command, const Overrides& o) {
    auto config = netlens::pipeline::load_run_config(o.config_path);
    if (!o.out.empty()) config.out_dir = o.out;
    if (o.seed >= 0) config.seed = static_cast<std::uint64_t>(o.seed);
    if (o.no_svg) config.trends.svg = false;
    if (o.include_comments) config.sentiment.peaks_include_comments = true;
    if (o.no_provider_filter) config.speedtest.provider_filter = false;
    if (o.tau > 0) config.sentiment.tau = o.tau;
    if (o.peak_k > 0) config.peaks.k = static_cast<std::size_t>(o.peak_k);
    if (o.min_separation >= 0) config.peaks.min_separation_days = o.min_separation;
    if (o.spike_z > 0) config.outage.z = o.spike_z;
    if (o.spike_min_count >= 0) config.outage.min_count = static_cast<std::size_t>(o.spike_min_count);
    if (o.percentile >= 0) config.popularity.percentile = o.percentile;
    if (!o.provider.empty()) config.sentiment.provider = o.provider;
    if (!o.isp.empty()) config.speedtest.isp = o.isp;

    auto result = netlens::pipeline::run(command, config);
    std::printf("%s: wrote %zu artifacts to %s", command.c_str(), result.artifacts.size(),
                config.out_dir.string().c_str());
    if (result.item_errors > 0)
        std::printf(" (%zu item errors, see errors.csv)", result.item_errors);
    std::printf("\n");
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"netlens: forum-corpus mining for network service insight"};
    app.require_subcommand(1);

    const char* commands[] = {"ingest",  "sentiment", "peaks",  "outages",
                              "popular", "speedtest", "trends", "report"};
    Overrides overrides;
    std::vector<CLI::App*> subs;
    for (const char* name : commands) {
        auto* sub = app.add_subcommand(name);
        attach_options(sub, overrides);
        subs.push_back(sub);
    }

    auto* gen = app.add_subcommand("gen-fixture", "generate a synthetic corpus with ground truth");
    std::string gen_out = "fixture", gen_data = "data";
    long long gen_seed = 42;
    gen->add_option("--out", gen_out, "fixture directory");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--data-dir", gen_data, "directory with lexicon/stopword/keyword files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            auto spec = netlens::fixture::default_fixture_spec(static_cast<std::uint64_t>(gen_seed));
            auto result = netlens::fixture::generate_fixture(spec, gen_out, gen_data);
            std::printf("fixture: %zu posts, %zu comments, %zu ocr docs in %s\n", result.posts,
                        result.comments, result.ocr_docs, result.dir.string().c_str());
            return 0;
        }
        for (std::size_t i = 0; i < subs.size(); ++i)
            if (subs[i]->parsed()) return run_command(commands[i], overrides);
    } catch (const netlens::error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
