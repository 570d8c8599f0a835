#include "hypoinv/hypoinv.h"

#include <cmath>
#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "hypoinv/config.hpp"
#include "hypoinv/error.hpp"
#include "hypoinv/field_io.hpp"
#include "hypoinv/posterior.hpp"
#include "hypoinv/runner.hpp"

struct hi_lattice {
  hypoinv::LatticePtr ptr;
};

struct hi_field {
  hypoinv::SpectralField f;
};

struct hi_operator {
  hypoinv::MultiplierOp op;
};

namespace {

thread_local std::string g_last_error;

hi_status to_status(hypoinv::ErrorCode code) {
  using hypoinv::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return HI_ERR_INVALID_ARGUMENT;
    case ErrorCode::size_mismatch: return HI_ERR_SIZE_MISMATCH;
    case ErrorCode::symmetry_violation: return HI_ERR_SYMMETRY;
    case ErrorCode::singular: return HI_ERR_SINGULAR;
    case ErrorCode::not_converged: return HI_ERR_NOT_CONVERGED;
    case ErrorCode::config: return HI_ERR_CONFIG;
    case ErrorCode::io: return HI_ERR_IO;
    case ErrorCode::usage: return HI_ERR_USAGE;
  }
  return HI_ERR_INTERNAL;
}

template <typename Fn>
hi_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return HI_OK;
  } catch (const hypoinv::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return HI_ERR_INTERNAL;
}

void require(bool cond, const char* what) {
  if (!cond) throw hypoinv::Error(hypoinv::ErrorCode::invalid_argument, what);
}

hypoinv::SmoothnessParams params(const hi_params* p) {
  require(p != nullptr, "null parameters");
  return {p->r, p->s, p->t, p->t0, p->d};
}

std::optional<double> opt(double v) { return std::isnan(v) ? std::nullopt : std::optional<double>(v); }

void fill(const hypoinv::RatePrediction& pred, hi_rate* out) {
  require(out != nullptr, "null output");
  out->exponent = pred.exponent;
  out->regime = static_cast<hi_regime>(pred.regime);
  out->hypotheses_ok = pred.hypotheses_ok() ? 1 : 0;
  out->has_secondary = pred.secondary ? 1 : 0;
  out->secondary = pred.secondary.value_or(0.0);
}

hypoinv::GaussianModel model_for(const hi_operator* forward, const hi_operator* prior_cov, double delta,
                                 const hypoinv::LatticePtr& lattice) {
  require(forward && prior_cov, "null operator");
  const double r = 0.5 * prior_cov->op.orders().t;
  return {lattice, forward->op, hypoinv::GaussianPrior::from_multiplier(prior_cov->op, r, lattice), 0.0, delta};
}

hypoinv::RunOptions run_options(const hi_run_options* o) {
  require(o != nullptr, "null options");
  hypoinv::RunOptions r;
  if (o->config_path) r.config_path = o->config_path;
  if (o->data_path) r.data_path = o->data_path;
  if (o->out_dir) r.out_dir = o->out_dir;
  r.force = o->force != 0;
  if (o->has_seed) r.seed = o->seed;
  if (o->threads > 0) r.threads = o->threads;
  return r;
}

}  // namespace

extern "C" {

const char* hi_version(void) { return HYPOINV_VERSION; }

const char* hi_last_error(void) { return g_last_error.c_str(); }

const char* hi_status_name(hi_status status) {
  switch (status) {
    case HI_OK: return "ok";
    case HI_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HI_ERR_SIZE_MISMATCH: return "size mismatch";
    case HI_ERR_SYMMETRY: return "symmetry violation";
    case HI_ERR_SINGULAR: return "singular";
    case HI_ERR_NOT_CONVERGED: return "not converged";
    case HI_ERR_CONFIG: return "config error";
    case HI_ERR_IO: return "I/O error";
    case HI_ERR_USAGE: return "usage error";
    case HI_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

hi_status hi_lattice_create(int dim, int n, hi_lattice** out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = new hi_lattice{hypoinv::build_lattice(dim, n)};
  });
}

void hi_lattice_destroy(hi_lattice* lattice) { delete lattice; }

hi_status hi_lattice_size(const hi_lattice* lattice, size_t* out) {
  return guarded([&] {
    require(lattice && out, "null argument");
    *out = lattice->ptr->size();
  });
}

hi_status hi_field_from_grid(const hi_lattice* lattice, const double* values, size_t count, hi_field** out) {
  return guarded([&] {
    require(lattice && values && out, "null argument");
    if (count != lattice->ptr->size()) throw hypoinv::Error(hypoinv::ErrorCode::size_mismatch, "sample count mismatch");
    *out = new hi_field{hypoinv::forward_transform(lattice->ptr, std::span<const double>(values, count))};
  });
}

hi_status hi_field_from_coeffs(const hi_lattice* lattice, const double* re_im, size_t count, hi_field** out) {
  return guarded([&] {
    require(lattice && re_im && out, "null argument");
    if (count != lattice->ptr->size())
      throw hypoinv::Error(hypoinv::ErrorCode::size_mismatch, "coefficient count mismatch");
    std::vector<hypoinv::Complex> c(count);
    for (size_t k = 0; k < count; ++k) c[k] = {re_im[2 * k], re_im[2 * k + 1]};
    *out = new hi_field{hypoinv::SpectralField(lattice->ptr, std::move(c))};
  });
}

hi_status hi_field_white_noise(const hi_lattice* lattice, uint64_t seed, hi_field** out) {
  return guarded([&] {
    require(lattice && out, "null argument");
    *out = new hi_field{hypoinv::sample_white_noise(lattice->ptr, seed)};
  });
}

void hi_field_destroy(hi_field* field) { delete field; }

hi_status hi_field_size(const hi_field* field, size_t* out) {
  return guarded([&] {
    require(field && out, "null argument");
    *out = field->f.size();
  });
}

hi_status hi_field_to_grid(const hi_field* field, double* values, size_t count) {
  return guarded([&] {
    require(field && values, "null argument");
    if (count != field->f.size()) throw hypoinv::Error(hypoinv::ErrorCode::size_mismatch, "buffer size mismatch");
    const auto grid = hypoinv::inverse_transform(field->f);
    std::memcpy(values, grid.data(), count * sizeof(double));
  });
}

hi_status hi_field_coeffs(const hi_field* field, double* re_im, size_t count) {
  return guarded([&] {
    require(field && re_im, "null argument");
    if (count != field->f.size()) throw hypoinv::Error(hypoinv::ErrorCode::size_mismatch, "buffer size mismatch");
    for (size_t k = 0; k < count; ++k) {
      re_im[2 * k] = field->f[k].real();
      re_im[2 * k + 1] = field->f[k].imag();
    }
  });
}

hi_status hi_field_sobolev_norm(const hi_field* field, double q, double* out) {
  return guarded([&] {
    require(field && out, "null argument");
    *out = hypoinv::sobolev_norm(field->f, q);
  });
}

hi_status hi_field_read_csv(const char* path, hi_field** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new hi_field{hypoinv::read_field_csv(path)};
  });
}

hi_status hi_field_write_csv(const hi_field* field, const char* path) {
  return guarded([&] {
    require(field && path, "null argument");
    hypoinv::write_field_csv(path, field->f);
  });
}

hi_status hi_operator_identity(hi_operator** out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = new hi_operator{hypoinv::identity_op()};
  });
}

hi_status hi_operator_bessel(double a, hi_operator** out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = new hi_operator{hypoinv::bessel_op(a)};
  });
}

hi_status hi_operator_heat(int spatial_dim, hi_operator** out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = new hi_operator{hypoinv::heat_op(spatial_dim)};
  });
}

hi_status hi_operator_compose(const hi_operator* a, const hi_operator* b, hi_operator** out) {
  return guarded([&] {
    require(a && b && out, "null argument");
    *out = new hi_operator{hypoinv::compose(a->op, b->op).multiplier()};
  });
}

hi_status hi_operator_adjoint(const hi_operator* op, hi_operator** out) {
  return guarded([&] {
    require(op && out, "null argument");
    *out = new hi_operator{hypoinv::adjoint(op->op).multiplier()};
  });
}

hi_status hi_operator_orders(const hi_operator* op, double* t, double* t0) {
  return guarded([&] {
    require(op && t && t0, "null argument");
    *t = op->op.orders().t;
    *t0 = op->op.orders().t0;
  });
}

hi_status hi_operator_apply(const hi_operator* op, const hi_field* u, hi_field** out) {
  return guarded([&] {
    require(op && u && out, "null argument");
    *out = new hi_field{hypoinv::apply(op->op, u->f)};
  });
}

void hi_operator_destroy(hi_operator* op) { delete op; }

hi_status hi_map_estimate(const hi_operator* forward, const hi_operator* prior_cov, double delta, const hi_field* data,
                          hi_field** out) {
  return guarded([&] {
    require(data && out, "null argument");
    const auto model = model_for(forward, prior_cov, delta, data->f.lattice());
    *out = new hi_field{hypoinv::map_estimate(model, data->f)};
  });
}

hi_status hi_posterior_trace(const hi_operator* forward, const hi_operator* prior_cov, double delta,
                             const hi_lattice* lattice, double q, double* out) {
  return guarded([&] {
    require(lattice && out, "null argument");
    const auto model = model_for(forward, prior_cov, delta, lattice->ptr);
    *out = hypoinv::posterior_trace(hypoinv::posterior_covariance(model), lattice->ptr, q);
  });
}

hi_status hi_bayes_rate(const hi_params* p, double zeta, hi_rate* out) {
  return guarded([&] { fill(hypoinv::bayes_rate(params(p), zeta), out); });
}

hi_status hi_frequentist_rate(const hi_params* p, hi_rate* out) {
  return guarded([&] { fill(hypoinv::frequentist_rate(params(p)), out); });
}

hi_status hi_contraction_rate(const hi_params* p, double kappa, hi_rate* out) {
  return guarded([&] { fill(hypoinv::contraction_rate(params(p), opt(kappa)), out); });
}

hi_status hi_credible_rate(const hi_params* p, double zeta1, double alpha, hi_rate* out) {
  return guarded([&] { fill(hypoinv::credible_rate(params(p), zeta1, opt(alpha)), out); });
}

const char* hi_regime_name(hi_regime regime) {
  static thread_local std::string name;
  name = hypoinv::to_string(static_cast<hypoinv::Regime>(regime));
  return name.c_str();
}

hi_status hi_params_from_config(const char* config_path, hi_params* out) {
  return guarded([&] {
    require(config_path && out, "null argument");
    const auto cfg = hypoinv::parse_config(hypoinv::read_text_file(config_path));
    const auto p = hypoinv::template_params(cfg.experiment.model);
    *out = hi_params{p.r, p.s, p.t, p.t0, p.d};
  });
}

hi_status hi_rates_report(const hi_params* p, double zeta, double kappa, double zeta1, double alpha, char* buf,
                          size_t cap, size_t* needed) {
  return guarded([&] {
    const std::string text = hypoinv::rates_report(params(p), zeta, opt(kappa), zeta1, opt(alpha));
    if (needed) *needed = text.size();
    if (buf && cap > 0) {
      const size_t n = std::min(cap - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
  });
}

hi_status hi_run_estimate(const hi_run_options* opts) {
  return guarded([&] { hypoinv::run_estimate(run_options(opts)); });
}

hi_status hi_run_experiment(const hi_run_options* opts) {
  return guarded([&] { hypoinv::run_experiment(run_options(opts)); });
}

}  // extern "C"
