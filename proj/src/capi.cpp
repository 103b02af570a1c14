#include "suboptlfd.h"

#include <fstream>
#include <string>
#include <vector>

#include "core/drex.hpp"
#include "core/eval.hpp"
#include "core/pipeline.hpp"
#include "core/sigmoid.hpp"

struct slfd_ctx {
    std::string last_error;
    std::vector<std::string> outputs;
};

namespace {

slfd_status guard(slfd_ctx* ctx, const std::function<void()>& body) {
    if (!ctx) return SLFD_ERR_INVALID;
    ctx->last_error.clear();
    try {
        body();
        return SLFD_OK;
    } catch (const std::invalid_argument& e) {
        ctx->last_error = e.what();
        return SLFD_ERR_INVALID;
    } catch (const std::exception& e) {
        ctx->last_error = e.what();
        return SLFD_ERR_RUNTIME;
    }
}

} // namespace

extern "C" {

slfd_ctx* slfd_ctx_new(void) {
    return new (std::nothrow) slfd_ctx();
}

void slfd_ctx_free(slfd_ctx* ctx) {
    delete ctx;
}

const char* slfd_ctx_last_error(const slfd_ctx* ctx) {
    return ctx ? ctx->last_error.c_str() : "null context";
}

const char* slfd_version(void) {
    return slfd::kVersion;
}

slfd_status slfd_run(slfd_ctx* ctx, const char* stage, const char* config_path,
                     const char* out_dir, long long seed) {
    return guard(ctx, [&] {
        if (!stage || !config_path)
            throw std::invalid_argument("stage and config_path must be non-null");
        std::ifstream in(config_path);
        if (!in) throw std::invalid_argument(std::string("cannot open config file: ") + config_path);
        slfd::Json config_json;
        try {
            in >> config_json;
        } catch (const std::exception& e) {
            throw std::invalid_argument(std::string("invalid JSON in ") + config_path + ": " + e.what());
        }
        if (out_dir) config_json["out"] = out_dir;
        if (seed >= 0) {
            config_json["seed"] = static_cast<std::uint64_t>(seed);
            if (std::string(stage) == "pipeline" && config_json.contains("seeds"))
                config_json.erase("seeds");
        }

        slfd::StageContext sctx;
        sctx.config = slfd::parse_pipeline_config(config_json);
        if (seed >= 0 && std::string(stage) == "pipeline")
            sctx.config.seeds = {static_cast<std::uint64_t>(seed)};
        sctx.out_dir = sctx.config.out_dir;
        sctx.config_hash = slfd::config_hash(slfd::pipeline_config_to_json(sctx.config));

        ctx->outputs.clear();
        if (std::string(stage) == "pipeline") {
            slfd::PipelineSummary summary = slfd::run_pipeline(sctx);
            for (const auto& f : summary.files) ctx->outputs.push_back(f.string());
            for (const auto& cell : summary.cells)
                if (!cell.ok)
                    ctx->outputs.push_back("FAILED " + cell.generator + "/" + cell.learner + "/seed" +
                                           std::to_string(cell.seed) + ": " + cell.error);
        } else {
            for (const auto& f : slfd::run_stage(stage, sctx)) ctx->outputs.push_back(f.string());
        }
    });
}

int slfd_output_count(const slfd_ctx* ctx) {
    return ctx ? static_cast<int>(ctx->outputs.size()) : 0;
}

const char* slfd_output_path(const slfd_ctx* ctx, int index) {
    if (!ctx || index < 0 || index >= static_cast<int>(ctx->outputs.size())) return nullptr;
    return ctx->outputs[static_cast<std::size_t>(index)].c_str();
}

slfd_status slfd_fit_sigmoid(slfd_ctx* ctx, const double* xs, const double* ys, int n,
                             double params_out[4], double* r_squared_out) {
    return guard(ctx, [&] {
        if (!xs || !ys || !params_out) throw std::invalid_argument("null argument");
        std::vector<slfd::FitPoint> points(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) points[i] = {xs[i], ys[i]};
        slfd::FitReport report = slfd::fit_sigmoid(points);
        params_out[0] = report.params.c;
        params_out[1] = report.params.k;
        params_out[2] = report.params.x0;
        params_out[3] = report.params.y0;
        if (r_squared_out) *r_squared_out = report.r_squared;
    });
}

slfd_status slfd_sigmoid_eval(const double params[4], double x, double* out) {
    if (!params || !out) return SLFD_ERR_INVALID;
    *out = slfd::sigmoid_eval({params[0], params[1], params[2], params[3]}, x);
    return SLFD_OK;
}

slfd_status slfd_pearson(slfd_ctx* ctx, const double* xs, const double* ys, int n, double* out) {
    return guard(ctx, [&] {
        if (!xs || !ys || !out) throw std::invalid_argument("null argument");
        std::vector<double> vx(xs, xs + n), vy(ys, ys + n);
        *out = slfd::pearson(vx, vy);
    });
}

double slfd_rank_middle_minimizer(double r_first, double r_last) {
    return slfd::optimal_middle_return(r_first, r_last);
}

} // extern "C"
