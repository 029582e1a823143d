#include "patchlam/patchlam.h"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <thread>
#include <vector>

#include "catalog.hpp"
#include "digdid.hpp"
#include "limits.hpp"
#include "modelfile.hpp"
#include "monodromy.hpp"
#include "simplex.hpp"

using namespace patchlam;

struct pl_model {
    PatchModel model;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

pl_status fail(pl_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

// Maps core exceptions onto status codes; the callable does the actual work.
template <class F>
pl_status guarded(F&& f) {
    try {
        return f();
    } catch (const ParseError& err) {
        return fail(PL_ERROR_PARSE, err.what());
    } catch (const HypothesisError& err) {
        return fail(PL_ERROR_HYPOTHESIS, err.what());
    } catch (const NumericError& err) {
        return fail(PL_ERROR_NUMERIC, err.what());
    } catch (const std::invalid_argument& err) {
        return fail(PL_ERROR_ARGUMENT, err.what());
    } catch (const std::exception& err) {
        return fail(PL_ERROR_INTERNAL, err.what());
    }
}

SamplingParams sampling_from(const pl_check_options* options) {
    SamplingParams params;
    if (!options) return params;
    if (options->samples_per_segment > 0) params.samples_per_segment = options->samples_per_segment;
    if (options->perturbations > 0) params.perturbations = options->perturbations;
    if (options->radius > 0) params.radius = options->radius;
    if (options->seed != 0) params.seed = options->seed;
    if (options->convergence_tol > 0) params.convergence_tol = options->convergence_tol;
    if (options->stability_tol > 0) params.stability_tol = options->stability_tol;
    return params;
}

pl_verdict to_c(Verdict v) {
    switch (v) {
        case Verdict::VerifiedSampled: return PL_VERIFIED_SAMPLED;
        case Verdict::Violated: return PL_VIOLATED;
        case Verdict::Inconclusive: return PL_INCONCLUSIVE;
    }
    return PL_INCONCLUSIVE;
}

pl_feasibility to_c(Feasibility f) {
    switch (f) {
        case Feasibility::TheoryCertain: return PL_THEORY_CERTAIN;
        case Feasibility::FoundNumerically: return PL_FOUND_NUMERICALLY;
        case Feasibility::Impossible: return PL_IMPOSSIBLE;
        case Feasibility::Undetermined: return PL_UNDETERMINED;
    }
    return PL_UNDETERMINED;
}

void fill_phenomenon(const PhenomenonResult& r, pl_phenomenon_result* out) {
    out->feasible = to_c(r.feasible);
    out->has_witness = r.witness.has_value();
    out->witness_m = r.witness ? r.witness->m : 0.0;
    out->witness_T = r.witness ? r.witness->T : 0.0;
    out->witness_lambda = r.witness ? r.witness->lambda : 0.0;
    out->definition_holds = r.definition_holds;
    out->sigma = r.sigma;
    out->chi = r.chi;
    out->limit_value = r.limit_value.value_or(std::nan(""));
    out->epsilon_correction = r.epsilon_correction;
    out->hypothesis_verdict = to_c(r.hypothesis_verdict);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int default_jobs() {
    if (const char* env = std::getenv("PATCHLAM_JOBS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

}  // namespace

extern "C" {

const char* pl_version(void) {
    return "0.1.0";
}

const char* pl_last_error(void) {
    return g_last_error.c_str();
}

void pl_string_free(char* s) {
    std::free(s);
}

pl_status pl_model_load_file(const char* path, pl_model** out) {
    if (!path || !out) return fail(PL_ERROR_ARGUMENT, "path and out must be non-NULL");
    return guarded([&] {
        auto handle = std::make_unique<pl_model>(pl_model{load_model_file(path)});
        *out = handle.release();
        return PL_OK;
    });
}

pl_status pl_model_load_string(const char* json_text, pl_model** out) {
    if (!json_text || !out) return fail(PL_ERROR_ARGUMENT, "json_text and out must be non-NULL");
    return guarded([&] {
        auto handle = std::make_unique<pl_model>(pl_model{parse_model(json_text)});
        *out = handle.release();
        return PL_OK;
    });
}

void pl_model_free(pl_model* model) {
    delete model;
}

int pl_model_patch_count(const pl_model* model) {
    return model ? model->model.dim() : 0;
}

pl_status pl_model_to_json(const pl_model* model, char** out_json) {
    if (!model || !out_json) return fail(PL_ERROR_ARGUMENT, "model and out_json must be non-NULL");
    return guarded([&] {
        *out_json = dup_string(model_to_json(model->model));
        return PL_OK;
    });
}

size_t pl_catalog_count(void) {
    return catalog().size();
}

const char* pl_catalog_name(size_t index) {
    return index < catalog().size() ? catalog()[index].name.c_str() : nullptr;
}

const char* pl_catalog_summary(size_t index) {
    return index < catalog().size() ? catalog()[index].summary.c_str() : nullptr;
}

size_t pl_catalog_param_count(const char* name) {
    const CatalogEntry* entry = name ? catalog_find(name) : nullptr;
    return entry ? entry->params.size() : 0;
}

pl_status pl_catalog_param(const char* name, size_t index, const char** out_param_name,
                           double* out_default_value) {
    const CatalogEntry* entry = name ? catalog_find(name) : nullptr;
    if (!entry) return fail(PL_ERROR_NOT_FOUND, "unknown catalog entry");
    if (index >= entry->params.size()) return fail(PL_ERROR_ARGUMENT, "parameter index out of range");
    if (out_param_name) *out_param_name = entry->params[index].name.c_str();
    if (out_default_value) *out_default_value = entry->params[index].value;
    return PL_OK;
}

pl_status pl_model_from_catalog(const char* name, const char* const* param_names,
                                const double* param_values, size_t param_count, pl_model** out) {
    if (!name || !out) return fail(PL_ERROR_ARGUMENT, "name and out must be non-NULL");
    const CatalogEntry* entry = catalog_find(name);
    if (!entry) return fail(PL_ERROR_NOT_FOUND, std::string("unknown catalog entry '") + name + "'");
    return guarded([&] {
        ParamMap overrides;
        for (size_t i = 0; i < param_count; ++i)
            overrides[param_names[i]] = param_values[i];
        auto handle = std::make_unique<pl_model>(pl_model{catalog_build(*entry, overrides)});
        *out = handle.release();
        return PL_OK;
    });
}

pl_status pl_growth_rate(const pl_model* model, double m, double T, pl_growth_result* out,
                         double* pi_out) {
    if (!model || !out) return fail(PL_ERROR_ARGUMENT, "model and out must be non-NULL");
    return guarded([&] {
        const MonodromyResult r = growth_rate(model->model, {m, T});
        out->lambda = r.Lambda;
        out->log_mu = r.log_mu;
        out->mu = r.log_scale == 0.0 ? r.mu : std::exp(r.log_mu);
        out->decoupled = r.decoupled;
        out->eventually_positive = r.eventually_positive;
        const auto [sigma, chi] = sigma_chi(model->model);
        out->sigma = sigma;
        out->chi = chi;
        if (pi_out)
            for (int i = 0; i < model->model.dim(); ++i) pi_out[i] = r.pi[i];
        return PL_OK;
    });
}

pl_status pl_limits(const pl_model* model, double m, int force, pl_limit_result* out,
                    char** report_text) {
    if (!model || !out) return fail(PL_ERROR_ARGUMENT, "model and out must be non-NULL");
    return guarded([&] {
        const LimitReport r = limit_report(model->model, m, force != 0);
        out->sigma = r.sigma;
        out->chi = r.chi;
        out->lambda_0T = r.lambda_0T;
        out->lambda_m0 = r.lambda_m0;
        out->lambda_00 = r.lambda_00;
        out->lambda_inf0 = r.lambda_inf0;
        out->has_mInf = r.lambda_mInf.value.has_value();
        out->lambda_mInf = r.lambda_mInf.value.value_or(std::nan(""));
        out->mInf_forced = r.lambda_mInf.forced;
        out->has_infT = r.lambda_infT.value.has_value();
        out->lambda_infT = r.lambda_infT.value.value_or(std::nan(""));
        out->infT_forced = r.lambda_infT.forced;
        out->has_0inf = r.lambda_0inf.value.has_value();
        out->lambda_0inf = r.lambda_0inf.value.value_or(std::nan(""));
        out->zeroInf_forced = r.lambda_0inf.forced;
        out->h3 = to_c(r.h3.verdict);
        out->h4 = to_c(r.h4.verdict);
        if (report_text) *report_text = dup_string(r.to_text());
        return PL_OK;
    });
}

pl_status pl_check(const pl_model* model, int hypothesis, double m,
                   const pl_check_options* options, pl_check_result* out, char** report_text) {
    if (!model || !out) return fail(PL_ERROR_ARGUMENT, "model and out must be non-NULL");
    return guarded([&] {
        HypothesisReport report;
        const SamplingParams params = sampling_from(options);
        switch (hypothesis) {
            case 2: report = check_h2(model->model); break;
            case 3: report = check_h3(model->model, m, params); break;
            case 4: report = check_h4(model->model, params); break;
            default: return fail(PL_ERROR_ARGUMENT, "hypothesis must be 2, 3 or 4");
        }
        out->verdict = to_c(report.verdict);
        out->witness_count = report.witnesses.size();
        if (report_text) *report_text = dup_string(report.to_text());
        return PL_OK;
    });
}

pl_status pl_sweep_csv(const pl_model* model, const double* m_values, size_t m_count,
                       const double* T_values, size_t T_count, int jobs, char** out_csv) {
    if (!model || !out_csv || !m_values || !T_values)
        return fail(PL_ERROR_ARGUMENT, "model, grids and out_csv must be non-NULL");
    if (m_count == 0 || T_count == 0) return fail(PL_ERROR_ARGUMENT, "grids must be non-empty");
    return guarded([&] {
        const size_t total = m_count * T_count;
        struct Row {
            double lambda, log_mu;
            bool decoupled;
        };
        std::vector<Row> rows(total);
        std::vector<std::string> errors(total);
        std::atomic<size_t> next{0};
        const int workers =
            std::max(1, std::min(jobs > 0 ? jobs : default_jobs(), static_cast<int>(total)));

        auto work = [&] {
            for (size_t idx = next.fetch_add(1); idx < total; idx = next.fetch_add(1)) {
                const double m = m_values[idx / T_count];
                const double T = T_values[idx % T_count];
                try {
                    const MonodromyResult r = growth_rate(model->model, {m, T});
                    rows[idx] = {r.Lambda, r.log_mu, r.decoupled};
                } catch (const std::exception& err) {
                    errors[idx] = err.what();
                }
            }
        };
        if (workers == 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) pool.emplace_back(work);
            for (auto& t : pool) t.join();
        }
        for (size_t idx = 0; idx < total; ++idx)
            if (!errors[idx].empty()) throw NumericError("sweep point failed: " + errors[idx]);

        std::string csv = "m,T,lambda,mu,decoupled\n";
        for (size_t idx = 0; idx < total; ++idx) {
            const double m = m_values[idx / T_count];
            const double T = T_values[idx % T_count];
            csv += format_double(m) + "," + format_double(T) + "," +
                   format_double(rows[idx].lambda) + "," +
                   format_double(std::exp(rows[idx].log_mu)) + "," +
                   (rows[idx].decoupled ? "1" : "0") + "\n";
        }
        *out_csv = dup_string(csv);
        return PL_OK;
    });
}

pl_status pl_trajectory_csv(const pl_model* model, double m, double T, const double* x0,
                            size_t x0_len, int periods, char** out_csv) {
    if (!model || !out_csv || !x0)
        return fail(PL_ERROR_ARGUMENT, "model, x0 and out_csv must be non-NULL");
    if (x0_len != static_cast<size_t>(model->model.dim()))
        return fail(PL_ERROR_ARGUMENT, "x0 length must equal the patch count");
    return guarded([&] {
        Vector start(static_cast<Eigen::Index>(x0_len));
        for (size_t i = 0; i < x0_len; ++i) start[static_cast<Eigen::Index>(i)] = x0[i];
        const TrajectoryResult r = trajectory_lyapunov(model->model, {m, T}, start, periods);
        std::string csv = "t";
        for (size_t i = 1; i <= x0_len; ++i) csv += ",x" + std::to_string(i);
        csv += ",log_norm\n";
        for (size_t p = 0; p < r.log_norm.size(); ++p) {
            csv += format_double(static_cast<double>(p + 1) * T);
            for (Eigen::Index i = 0; i < r.proportions[p].size(); ++i)
                csv += "," + format_double(r.proportions[p][i]);
            csv += "," + format_double(r.log_norm[p]) + "\n";
        }
        *out_csv = dup_string(csv);
        return PL_OK;
    });
}

pl_status pl_classify(const pl_model* model, double* rbar_out, int* labels_out, double* sigma_out,
                      double* chi_out) {
    if (!model) return fail(PL_ERROR_ARGUMENT, "model must be non-NULL");
    return guarded([&] {
        const PatchClassification c = classify(model->model);
        for (int i = 0; i < model->model.dim(); ++i) {
            if (rbar_out) rbar_out[i] = c.rbar[i];
            if (labels_out)
                labels_out[i] = c.labels[static_cast<size_t>(i)] == PatchLabel::Sink ? -1
                                : c.labels[static_cast<size_t>(i)] == PatchLabel::Source ? 1
                                                                                         : 0;
        }
        if (sigma_out) *sigma_out = c.sigma;
        if (chi_out) *chi_out = c.chi;
        return PL_OK;
    });
}

pl_status pl_dig_scan(const pl_model* model, const double* m_values, size_t m_count,
                      const double* T_values, size_t T_count, const pl_check_options* options,
                      pl_phenomenon_result* out, char** report_text) {
    if (!model || !out || !m_values || !T_values)
        return fail(PL_ERROR_ARGUMENT, "model, grids and out must be non-NULL");
    return guarded([&] {
        const PhenomenonResult r =
            dig_scan(model->model, std::vector<double>(m_values, m_values + m_count),
                     std::vector<double>(T_values, T_values + T_count), sampling_from(options));
        fill_phenomenon(r, out);
        if (report_text) *report_text = dup_string(r.to_text());
        return PL_OK;
    });
}

pl_status pl_did_scan(const pl_model* model, const double* m_values, size_t m_count,
                      const double* T_values, size_t T_count, double epsilon,
                      const pl_check_options* options, pl_phenomenon_result* out,
                      char** constructed_model_json, char** report_text) {
    if (!model || !out || !m_values || !T_values)
        return fail(PL_ERROR_ARGUMENT, "model, grids and out must be non-NULL");
    return guarded([&] {
        const PatchModel& src = model->model;
        bool has_migration = false;
        for (int k = 0; k < src.migration.segment_count() && !has_migration; ++k)
            if (!src.migration.segment_is_constant(k) ||
                !src.migration.segment_matrix(k).isZero(0.0))
                has_migration = true;

        const PhenomenonResult r =
            did_scan(src.growth, std::vector<double>(m_values, m_values + m_count),
                     std::vector<double>(T_values, T_values + T_count), epsilon,
                     has_migration ? &src.migration : nullptr, sampling_from(options));
        fill_phenomenon(r, out);
        if (constructed_model_json) {
            *constructed_model_json = nullptr;
            if (r.constructed_migration) {
                PatchModel built = make_patch_model(src.growth, *r.constructed_migration,
                                                    src.name.empty() ? "did-construction"
                                                                     : src.name + "-did",
                                                    "worst-patch migration construction");
                *constructed_model_json = dup_string(model_to_json(built));
            }
        }
        if (report_text) *report_text = dup_string(r.to_text());
        return PL_OK;
    });
}

}  // extern "C"
