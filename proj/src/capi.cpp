#include "cvqkd/cvqkd.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "cvqkd/decoy.hpp"
#include "cvqkd/error.hpp"
#include "cvqkd/protocol.hpp"
#include "cvqkd/reconciliation.hpp"
#include "cvqkd/security.hpp"

struct cvqkd_decoy {
    cvqkd::decoy::DecoyDesign design;
};
struct cvqkd_code {
    std::shared_ptr<const cvqkd::reconciliation::BinaryLinearCode> code;
};
struct cvqkd_bench {
    cvqkd::reconciliation::BenchResult result;
};
struct cvqkd_config {
    cvqkd::protocol::ProtocolConfig config;
};
struct cvqkd_session {
    cvqkd::protocol::SessionTranscript transcript;
};

namespace {

thread_local std::string g_error;
thread_local int g_error_line = 0;
thread_local int g_error_photon = -1;

cvqkd_status status_of(cvqkd::ErrorKind k) {
    using cvqkd::ErrorKind;
    switch (k) {
        case ErrorKind::InvalidArgument:
            return CVQKD_ERR_INVALID_ARGUMENT;
        case ErrorKind::Dimension:
            return CVQKD_ERR_DIMENSION;
        case ErrorKind::Singular:
            return CVQKD_ERR_SINGULAR;
        case ErrorKind::Truncation:
            return CVQKD_ERR_TRUNCATION;
        case ErrorKind::Infeasible:
            return CVQKD_ERR_INFEASIBLE;
        case ErrorKind::Unphysical:
            return CVQKD_ERR_UNPHYSICAL;
        case ErrorKind::Config:
            return CVQKD_ERR_CONFIG;
        case ErrorKind::Io:
            return CVQKD_ERR_IO;
        case ErrorKind::Reconciliation:
            return CVQKD_ERR_RECONCILIATION;
        case ErrorKind::Estimation:
            return CVQKD_ERR_ESTIMATION;
    }
    return CVQKD_ERR_INTERNAL;
}

template <class F>
cvqkd_status guarded(F&& f) {
    g_error.clear();
    g_error_line = 0;
    g_error_photon = -1;
    try {
        f();
        return CVQKD_OK;
    } catch (const cvqkd::InfeasibleError& e) {
        g_error = e.what();
        g_error_photon = e.photon_number();
        return CVQKD_ERR_INFEASIBLE;
    } catch (const cvqkd::ConfigError& e) {
        g_error = e.what();
        g_error_line = e.line();
        return CVQKD_ERR_CONFIG;
    } catch (const cvqkd::Error& e) {
        g_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        g_error = "out of memory";
        return CVQKD_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_error = e.what();
        return CVQKD_ERR_INTERNAL;
    } catch (...) {
        g_error = "unknown error";
        return CVQKD_ERR_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) cvqkd::fail(cvqkd::ErrorKind::InvalidArgument, std::string(what) + " must not be NULL");
}

cvqkd::channel::ChannelParams to_params(const cvqkd_channel* c) {
    need(c, "channel");
    cvqkd::channel::ChannelParams p;
    p.T = c->T;
    p.xi = c->xi;
    p.eta = c->eta;
    p.detection = c->detection == CVQKD_HETERODYNE ? cvqkd::channel::Detection::Heterodyne
                                                   : cvqkd::channel::Detection::Homodyne;
    p.eta_trusted = c->eta_trusted != 0;
    return p;
}

cvqkd_keyrate_report to_c(const cvqkd::security::KeyRateReport& r) {
    cvqkd_keyrate_report o{};
    o.d = r.d;
    o.va = r.va;
    o.T = r.T;
    o.xi = r.xi;
    o.eta = r.eta;
    o.eta_trusted = r.eta_trusted ? 1 : 0;
    o.detection = r.detection == cvqkd::channel::Detection::Heterodyne ? CVQKD_HETERODYNE : CVQKD_HOMODYNE;
    o.beta = r.beta;
    o.snr = r.snr;
    o.I_AB = r.I_AB;
    o.chi_BE = r.chi_BE;
    o.K = r.K;
    o.F = r.F;
    o.delta_xi = r.delta_xi;
    return o;
}

}  // namespace

extern "C" {

const char* cvqkd_version(void) { return "1.0.0"; }
const char* cvqkd_last_error(void) { return g_error.c_str(); }
int cvqkd_last_error_line(void) { return g_error_line; }
int cvqkd_last_error_photon_number(void) { return g_error_photon; }

cvqkd_status cvqkd_distance_to_T(double distance_km, double loss_db_per_km, double* T) {
    return guarded([&] {
        need(T, "T");
        *T = cvqkd::channel::distance_to_T(distance_km, loss_db_per_km);
    });
}

cvqkd_status cvqkd_key_rate(int d, double va, const cvqkd_channel* channel, double beta, cvqkd_keyrate_report* out) {
    return guarded([&] {
        need(out, "out");
        *out = to_c(cvqkd::security::secret_key_rate(d, va, to_params(channel), beta));
    });
}

cvqkd_status cvqkd_optimize_va(int d, const cvqkd_channel* channel, double beta, double va_lo, double va_hi,
                               double* va) {
    return guarded([&] {
        need(va, "va");
        *va = cvqkd::security::optimize_va(d, to_params(channel), beta, va_lo, va_hi);
    });
}

cvqkd_status cvqkd_correlation(int d, double va, double* z) {
    return guarded([&] {
        need(z, "z");
        *z = cvqkd::security::z_d(d, va);
    });
}

cvqkd_status cvqkd_equivalent_excess_noise(int d, double va, double* F, double* delta_xi) {
    return guarded([&] {
        const auto e = cvqkd::security::equivalent_excess_noise(d, va);
        if (F) *F = e.F;
        if (delta_xi) *delta_xi = e.delta_xi;
    });
}

cvqkd_status cvqkd_biawgn_capacity(double snr, double* capacity) {
    return guarded([&] {
        need(capacity, "capacity");
        *capacity = cvqkd::reconciliation::biawgn_capacity(snr);
    });
}

cvqkd_status cvqkd_p_succ(int d, double alpha, double* p) {
    return guarded([&] {
        need(p, "p");
        *p = cvqkd::decoy::p_succ(d, alpha);
    });
}

cvqkd_status cvqkd_povm_scale(int d, double alpha, int n_max, double* pi, int* k_star, int* index_formula_k,
                              double* index_formula_value) {
    return guarded([&] {
        const auto s = cvqkd::decoy::povm_scale(d, alpha, n_max);
        if (pi) *pi = s.pi;
        if (k_star) *k_star = s.k_star;
        if (index_formula_k) *index_formula_k = s.index_formula_k;
        if (index_formula_value) *index_formula_value = s.index_formula_value;
    });
}

cvqkd_status cvqkd_decoy_optimize(int d, double alpha, double p, int n_radii_max, int n_max, cvqkd_decoy** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        cvqkd::decoy::DecoyOptions opt;
        if (n_radii_max > 0) opt.n_radii_max = n_radii_max;
        opt.n_max = n_max;
        auto h = std::make_unique<cvqkd_decoy>();
        h->design = cvqkd::decoy::optimize_decoy(d, alpha, p, opt);
        *out = h.release();
    });
}

cvqkd_status cvqkd_decoy_read(const char* path, cvqkd_decoy** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        auto h = std::make_unique<cvqkd_decoy>();
        h->design = cvqkd::decoy::read_design_file(path);
        *out = h.release();
    });
}

cvqkd_status cvqkd_decoy_write(const cvqkd_decoy* design, const char* path) {
    return guarded([&] {
        need(design, "design");
        need(path, "path");
        cvqkd::decoy::write_design_file(path, design->design);
    });
}

cvqkd_status cvqkd_decoy_get_info(const cvqkd_decoy* design, cvqkd_decoy_info* out) {
    return guarded([&] {
        need(design, "design");
        need(out, "out");
        const auto& d = design->design;
        *out = {d.d, d.alpha, d.p, d.epsilon, d.tail_slack, d.n_max, d.radii.size()};
    });
}

cvqkd_status cvqkd_decoy_component(const cvqkd_decoy* design, size_t i, double* radius, double* weight) {
    return guarded([&] {
        need(design, "design");
        cvqkd::require(i < design->design.radii.size(), cvqkd::ErrorKind::InvalidArgument,
                       "decoy component index out of range");
        if (radius) *radius = design->design.radii[i];
        if (weight) *weight = design->design.weights[i];
    });
}

void cvqkd_decoy_free(cvqkd_decoy* design) { delete design; }

cvqkd_status cvqkd_code_from_spec(const char* spec, cvqkd_code** out) {
    return guarded([&] {
        need(spec, "spec");
        need(out, "out");
        *out = nullptr;
        auto h = std::make_unique<cvqkd_code>();
        h->code = cvqkd::reconciliation::code_from_spec(spec);
        *out = h.release();
    });
}

cvqkd_status cvqkd_code_size(const cvqkd_code* code, size_t* n_bits, size_t* k_bits) {
    return guarded([&] {
        need(code, "code");
        if (n_bits) *n_bits = code->code->n_bits();
        if (k_bits) *k_bits = code->code->k_bits();
    });
}

void cvqkd_code_free(cvqkd_code* code) { delete code; }

cvqkd_status cvqkd_bench_run(int d, double snr, const cvqkd_code* code, size_t frames, uint64_t seed,
                             cvqkd_bench** out) {
    return guarded([&] {
        need(code, "code");
        need(out, "out");
        *out = nullptr;
        cvqkd::Rng rng(seed);
        auto h = std::make_unique<cvqkd_bench>();
        h->result = cvqkd::reconciliation::reconcile_bench(d, snr, *code->code, frames, rng);
        *out = h.release();
    });
}

cvqkd_status cvqkd_bench_get_summary(const cvqkd_bench* bench, cvqkd_bench_summary* out) {
    return guarded([&] {
        need(bench, "bench");
        need(out, "out");
        const auto& r = bench->result;
        out->d = r.d;
        out->snr = r.snr;
        out->sigma2 = r.sigma2;
        out->frames = r.rec.frames;
        out->frames_ok = r.rec.successful_frames();
        out->capacity = r.rec.capacity;
        out->beta_achieved = r.rec.beta_achieved;
        out->ks_min_p = r.ks_p_values.empty() ? 1.0 : *std::min_element(r.ks_p_values.begin(), r.ks_p_values.end());
        out->w_variance = r.w_variance;
        out->max_abs_corr_uw = r.max_abs_corr_uw;
    });
}

cvqkd_status cvqkd_bench_frame(const cvqkd_bench* bench, size_t i, int* success, size_t* raw_errors,
                               size_t* decoded_errors) {
    return guarded([&] {
        need(bench, "bench");
        const auto& r = bench->result.rec;
        cvqkd::require(i < r.frames, cvqkd::ErrorKind::InvalidArgument, "frame index out of range");
        if (success) *success = r.frame_success[i];
        if (raw_errors) *raw_errors = r.raw_errors[i];
        if (decoded_errors) *decoded_errors = r.decoded_errors[i];
    });
}

void cvqkd_bench_free(cvqkd_bench* bench) { delete bench; }

cvqkd_status cvqkd_config_default(cvqkd_config** out) {
    return guarded([&] {
        need(out, "out");
        *out = new cvqkd_config();
    });
}

cvqkd_status cvqkd_config_load(const char* path, cvqkd_config** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        auto h = std::make_unique<cvqkd_config>();
        h->config = cvqkd::protocol::load_config(path);
        *out = h.release();
    });
}

cvqkd_status cvqkd_config_set(cvqkd_config* config, const char* key, const char* value) {
    return guarded([&] {
        need(config, "config");
        need(key, "key");
        need(value, "value");
        auto c = config->config;
        cvqkd::protocol::set_config_value(c, key, value, 0);
        if (std::string(key) == "distance_km" || std::string(key) == "loss_db_per_km") {
            if (c.distance_km) c.channel.T = cvqkd::channel::distance_to_T(*c.distance_km, c.loss_db_per_km);
        }
        config->config = c;
    });
}

void cvqkd_config_free(cvqkd_config* config) { delete config; }

cvqkd_status cvqkd_session_run(const cvqkd_config* config, int distill, cvqkd_session** out) {
    return guarded([&] {
        need(config, "config");
        need(out, "out");
        *out = nullptr;
        const auto& c = config->config;
        try {
            c.validate();
        } catch (const cvqkd::ConfigError&) {
            throw;
        } catch (const cvqkd::Error& e) {
            throw cvqkd::ConfigError(std::string("config: ") + e.what(), 0);
        }
        std::shared_ptr<const cvqkd::reconciliation::BinaryLinearCode> code;
        if (distill) code = cvqkd::reconciliation::code_from_spec(c.code);
        cvqkd::Rng rng(c.seed);
        auto h = std::make_unique<cvqkd_session>();
        h->transcript = cvqkd::protocol::run_flow(c, rng);
        if (distill) cvqkd::protocol::distill(h->transcript, *code, rng);
        *out = h.release();
    });
}

cvqkd_status cvqkd_session_get_info(const cvqkd_session* session, cvqkd_session_info* out) {
    return guarded([&] {
        need(session, "session");
        need(out, "out");
        using cvqkd::protocol::Label;
        const auto& t = session->transcript;
        *out = cvqkd_session_info{};
        out->T_hat = t.estimate.T;
        out->xi_hat = t.estimate.xi;
        out->estimation_samples = t.estimate.samples;
        out->blocks_key = t.count(Label::Key);
        out->blocks_estimation = t.count(Label::Estimation);
        out->blocks_decoy = t.count(Label::Decoy);
        out->blocks_discarded = t.count(Label::Discarded);
        out->distilled = t.distilled ? 1 : 0;
        out->frames = t.frames;
        out->frames_ok = static_cast<size_t>(std::count(t.frame_success.begin(), t.frame_success.end(), 1));
        out->beta_achieved = t.beta_achieved;
        out->report = to_c(t.report);
        out->n_key = t.n_key;
        out->key_length = t.key_length;
    });
}

cvqkd_status cvqkd_session_summary(const cvqkd_session* session, char* buf, size_t buf_len, size_t* needed) {
    return guarded([&] {
        need(session, "session");
        const std::string s = cvqkd::protocol::summary_line(session->transcript);
        if (needed) *needed = s.size();
        if (buf && buf_len > 0) {
            const size_t n = std::min(buf_len - 1, s.size());
            std::memcpy(buf, s.data(), n);
            buf[n] = '\0';
        }
    });
}

size_t cvqkd_session_warning_count(const cvqkd_session* session) {
    return session ? session->transcript.warnings.size() : 0;
}

const char* cvqkd_session_warning(const cvqkd_session* session, size_t i) {
    if (!session || i >= session->transcript.warnings.size()) return nullptr;
    return session->transcript.warnings[i].c_str();
}

cvqkd_status cvqkd_session_write(const cvqkd_session* session, const char* dir) {
    return guarded([&] {
        need(session, "session");
        need(dir, "dir");
        cvqkd::protocol::write_transcript(session->transcript, dir);
    });
}

void cvqkd_session_free(cvqkd_session* session) { delete session; }

}  // extern "C"
