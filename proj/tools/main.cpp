// subopt-lfd: reward learning from suboptimal demonstrations.
//
// Stage runner over the shared library's C interface. Each subcommand
// executes one pipeline stage against a JSON config;`pipeline` runs the
// full (seed x generator x learner) comparison grid.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "suboptlfd.h"

namespace {

struct CtxDeleter {
    void operator()(slfd_ctx* ctx) const { slfd_ctx_free(ctx); }
};

const std::vector<std::pair<std::string, std::string>> kStages = {
    {"demo-gen", "generate suboptimal demonstrations from a partially trained policy"},
    {"bc", "behavioral cloning on the demonstrations"},
    {"airl", "adversarial reward + policy training (config 'airl.noisy' selects the noisy variant)"},
    {"noise-gen", "synthesize the noise-annotated trajectory dataset"},
    {"fit", "fit the sigmoid noise-performance curve"},
    {"ssrr", "regress the idealized reward against the fitted curve"},
    {"drex", "train the pairwise-ranking baseline reward"},
    {"rl", "train a policy against a learned reward checkpoint"},
    {"eval", "correlation, ranking, and policy-quality report"},
    {"pipeline", "run the full generator x learner comparison grid"},
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"reward learning from suboptimal demonstrations"};
    app.set_version_flag("--version", slfd_version());
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    bool quiet = false;

    std::string chosen;
    for (const auto& [name, help] : kStages) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--seed", seed, "override the root seed");
        sub->add_option("--out", out_dir, "override the output directory");
        sub->add_flag("--quiet", quiet, "suppress the output-file listing");
        sub->callback([&chosen, name = name] { chosen = name; });
    }

    CLI11_PARSE(app, argc, argv);

    std::unique_ptr<slfd_ctx, CtxDeleter> ctx(slfd_ctx_new());
    if (!ctx) {
        std::fprintf(stderr, "error: out of memory\n");
        return 2;
    }

    slfd_status status = slfd_run(ctx.get(), chosen.c_str(), config_path.c_str(),
                                  out_dir.empty() ? nullptr : out_dir.c_str(), seed);
    if (status != SLFD_OK) {
        std::fprintf(stderr, "error: %s\n", slfd_ctx_last_error(ctx.get()));
        return status == SLFD_ERR_INVALID ? 1 : 2;
    }

    if (!quiet) {
        int n = slfd_output_count(ctx.get());
        for (int i = 0; i < n; ++i)
            std::printf("%s\n", slfd_output_path(ctx.get(), i));
    }
    return 0;
}
