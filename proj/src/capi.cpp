#include "fpc/fpc.h"

#include "fpc/ape.hpp"
#include "fpc/csv.hpp"
#include "fpc/error.hpp"
#include "fpc/mestimation.hpp"
#include "fpc/montecarlo.hpp"
#include "fpc/report.hpp"
#include "fpc/shrinkage.hpp"

#include <cmath>
#include <memory>
#include <new>
#include <string>
#include <vector>

struct fpc_dataset {
  fpc::ObservedDataset data;
  fpc::Matrix attrs;
  std::vector<std::string> attr_names;
};

struct fpc_report {
  std::vector<fpc::EstimateRow> rows;
};

struct fpc_summary {
  fpc::SummaryTable table;
};

namespace {

thread_local std::string last_error;

fpc_status fail(fpc_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
fpc_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return FPC_OK;
  } catch (const fpc::Error& e) {
    return fail(static_cast<fpc_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(FPC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(FPC_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* message) {
  if (!ok) throw fpc::Error(fpc::ErrorCode::Input, message);
}

std::vector<std::string> names_of(const char* const* list, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < n; ++j) {
    require(list && list[j], "column name list contains a null entry");
    out.emplace_back(list[j]);
  }
  return out;
}

fpc::Matrix row_major(const double* p, std::size_t n, std::size_t k) {
  if (k == 0) return fpc::Matrix(static_cast<Eigen::Index>(n), 0);
  require(p != nullptr, "data block is null");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      p, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
}

std::vector<std::string> default_names(const char* stem, std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < k; ++j) out.push_back(stem + std::to_string(j + 1));
  return out;
}

struct FamilySpec {
  fpc::Family family;
  fpc::Dimension dim;
  const char* label;
};

FamilySpec family_spec(fpc_family f) {
  using fpc::Dimension;
  using fpc::Family;
  switch (f) {
    case FPC_FAMILY_EHW: return {Family::EHW, Dimension::G, "ehw"};
    case FPC_FAMILY_LZ_G: return {Family::LZ_OneWay, Dimension::G, "lz-g"};
    case FPC_FAMILY_LZ_H: return {Family::LZ_OneWay, Dimension::H, "lz-h"};
    case FPC_FAMILY_CGM: return {Family::CGM, Dimension::G, "cgm"};
    case FPC_FAMILY_CGM2: return {Family::CGM2, Dimension::G, "cgm2"};
    case FPC_FAMILY_ADJ_ONEWAY_G: return {Family::AdjOneWay, Dimension::G, "adj-oneway-g"};
    case FPC_FAMILY_ADJ_ONEWAY_H: return {Family::AdjOneWay, Dimension::H, "adj-oneway-h"};
    case FPC_FAMILY_ADJ_TWOWAY: return {Family::AdjTwoWay, Dimension::G, "adj-twoway"};
    case FPC_FAMILY_ADJ_CGM: return {Family::AdjCGM, Dimension::G, "adj-cgm"};
  }
  throw fpc::Error(fpc::ErrorCode::Input, "unknown variance family code " + std::to_string(int(f)));
}

bool two_way_family(fpc_family f) {
  return f == FPC_FAMILY_LZ_H || f == FPC_FAMILY_CGM || f == FPC_FAMILY_CGM2 ||
         f == FPC_FAMILY_ADJ_ONEWAY_H || f == FPC_FAMILY_ADJ_TWOWAY || f == FPC_FAMILY_ADJ_CGM;
}

fpc::VarianceReport coef_variance(const FamilySpec& spec, const fpc_estimate_options& o,
                                  const fpc::ScoreBundle& s, const fpc::ClusterIndex& c,
                                  const fpc::AdjustmentInputs& in) {
  fpc::VarianceOptions vo;
  vo.small_sample = o.small_sample != 0;
  switch (spec.family) {
    case fpc::Family::EHW: return fpc::v_ehw(s.scores, s.hessian_avg, vo);
    case fpc::Family::LZ_OneWay: return fpc::v_lz_oneway(s.scores, s.hessian_avg, c, spec.dim, vo);
    case fpc::Family::CGM: return fpc::v_cgm(s.scores, s.hessian_avg, c, vo);
    case fpc::Family::CGM2: return fpc::v_cgm2(s.scores, s.hessian_avg, c, vo);
    case fpc::Family::AdjOneWay:
      return fpc::adjusted_oneway(in, o.oneway_case, spec.dim, s.hessian_avg).report;
    case fpc::Family::AdjTwoWay: return fpc::adjusted_twoway(in, o.twoway_case, s.hessian_avg).report;
    case fpc::Family::AdjCGM: return fpc::adjusted_cgm(in, s.hessian_avg).report;
  }
  throw fpc::Error(fpc::ErrorCode::Input, "unsupported family");
}

std::string join_flags(const fpc::VarianceReport& r, double v) {
  std::string out;
  auto add = [&](const std::string& s) { out += (out.empty() ? "" : ";") + s; };
  if (v < 0.0) add("negative_variance");
  for (const auto& n : r.notes)
    if (n.rfind("negative variance", 0) != 0) add(n);
  return out;
}

void append_rows(std::vector<fpc::EstimateRow>& rows, const std::vector<std::string>& targets,
                 const fpc::Vector& estimate, const fpc::VarianceReport& r, const char* family,
                 double level) {
  const double crit = fpc::critical_value(r.dof, 1.0 - (1.0 - level) / 2.0);
  for (Eigen::Index j = 0; j < estimate.size(); ++j) {
    fpc::EstimateRow row;
    row.target = targets[static_cast<std::size_t>(j)];
    row.family = family;
    row.estimate = estimate(j);
    row.se = r.se(j);
    row.dof = r.dof;
    row.critical_value = crit;
    row.ci_lower = estimate(j) - crit * r.se(j);
    row.ci_upper = estimate(j) + crit * r.se(j);
    row.flags = join_flags(r, r.V(j, j));
    rows.push_back(std::move(row));
  }
}

fpc::FittedModel fit(const fpc_dataset& ds, const fpc_estimate_options& o) {
  const fpc::ObservedDataset& d = ds.data;
  auto single_x = [&](const char* what) {
    if (d.x.cols() != 1)
      throw fpc::Error(fpc::ErrorCode::Input,
                       std::string(what) + " takes exactly one assignment column");
    return fpc::Vector(d.x.col(0));
  };
  fpc::RegressorSpec spec;
  spec.intercept = o.intercept != 0;
  for (Eigen::Index j = 0; j < d.x.cols(); ++j) spec.x_cols.push_back(static_cast<int>(j));
  for (Eigen::Index j = 0; j < d.z.cols(); ++j) spec.z_cols.push_back(static_cast<int>(j));
  fpc::FittedModel m;
  switch (o.model) {
    case FPC_MODEL_OLS: return fpc::fit_ols(d, spec);
    case FPC_MODEL_PROBIT: return fpc::fit_probit(d, spec);
    case FPC_MODEL_DIFF_IN_MEANS: m = fpc::fit_diff_in_means(d.y, single_x("difference in means")); break;
    case FPC_MODEL_ONE_WAY_FE:
      m = fpc::fit_one_way_fe(d.y, single_x("one-way fixed effects"), d.clusters);
      break;
    case FPC_MODEL_TWO_WAY_FE:
      m = fpc::fit_two_way_fe(d.y, single_x("two-way fixed effects"), d.clusters);
      break;
    default: throw fpc::Error(fpc::ErrorCode::Input, "unknown model code");
  }
  if (!d.x_names.empty() && m.theta.size() == 1) m.names = {d.x_names[0]};
  else if (!d.x_names.empty() && m.theta.size() == 2) m.names = {"(intercept)", d.x_names[0]};
  return m;
}

}  // namespace

extern "C" {

const char* fpc_last_error(void) { return last_error.c_str(); }

const char* fpc_status_string(fpc_status status) {
  switch (status) {
    case FPC_OK: return "ok";
    case FPC_ERR_INTERNAL: return "internal error";
    default:
      if (status >= FPC_ERR_INPUT && status <= FPC_ERR_STUDY_FAILED)
        return fpc::to_string(static_cast<fpc::ErrorCode>(static_cast<int>(status)));
      return "unknown status";
  }
}

const char* fpc_version(void) { return "0.1.0"; }

fpc_status fpc_dataset_read_csv(const char* path, const fpc_columns* columns, fpc_dataset** out) {
  return guarded([&] {
    require(path && columns && out, "null argument");
    require(columns->y && columns->cluster_g, "outcome and G cluster columns are required");
    *out = nullptr;
    const fpc::CsvTable t = fpc::CsvTable::read(path);
    auto ds = std::make_unique<fpc_dataset>();
    fpc::ObservedDataset& d = ds->data;
    d.y = t.numeric(columns->y);
    d.x_names = names_of(columns->x, columns->n_x);
    d.z_names = names_of(columns->z, columns->n_z);
    ds->attr_names = names_of(columns->attrs, columns->n_attrs);
    d.x = t.numeric(d.x_names);
    d.z = t.numeric(d.z_names);
    ds->attrs = t.numeric(ds->attr_names);
    const auto g = t.strings(columns->cluster_g);
    if (columns->cluster_h) {
      const auto h = t.strings(columns->cluster_h);
      d.clusters = fpc::canonicalize(std::span<const std::string>(g), std::span<const std::string>(h));
    } else {
      d.clusters = fpc::canonicalize(std::span<const std::string>(g));
    }
    d.meta = fpc::resolve_meta(d.clusters, t.rows(), 0, 0, 0);
    d.validate();
    *out = ds.release();
  });
}

fpc_status fpc_dataset_from_arrays(size_t n, const double* y, const double* x, size_t n_x,
                                   const double* z, size_t n_z, const double* attrs, size_t n_attrs,
                                   const int64_t* g, const int64_t* h, fpc_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = nullptr;
    require(n > 0, "data set has no rows");
    require(y && g, "outcome and G labels are required");
    auto ds = std::make_unique<fpc_dataset>();
    fpc::ObservedDataset& d = ds->data;
    d.y = Eigen::Map<const fpc::Vector>(y, static_cast<Eigen::Index>(n));
    d.x = row_major(x, n, n_x);
    d.z = row_major(z, n, n_z);
    ds->attrs = row_major(attrs, n, n_attrs);
    d.x_names = default_names("x", n_x);
    d.z_names = default_names("z", n_z);
    ds->attr_names = default_names("attr", n_attrs);
    std::span<const std::int64_t> gs(g, n);
    d.clusters = fpc::canonicalize(gs, h ? std::span<const std::int64_t>(h, n) : gs);
    d.clusters.one_way = h == nullptr;
    d.meta = fpc::resolve_meta(d.clusters, n, 0, 0, 0);
    d.validate();
    *out = ds.release();
  });
}

fpc_status fpc_dataset_set_population(fpc_dataset* data, int64_t population_size, int64_t total_g,
                                      int64_t total_h) {
  return guarded([&] {
    require(data != nullptr, "null data set");
    require(population_size >= 0 && total_g >= 0 && total_h >= 0,
            "population metadata must be nonnegative");
    fpc::ObservedDataset& d = data->data;
    const fpc::PopulationMeta previous = d.meta;
    d.meta = fpc::resolve_meta(d.clusters, d.rows(), population_size, static_cast<int>(total_g),
                               static_cast<int>(total_h));
    try {
      d.validate();
    } catch (...) {
      d.meta = previous;
      throw;
    }
  });
}

size_t fpc_dataset_rows(const fpc_dataset* data) { return data ? data->data.rows() : 0; }

void fpc_dataset_free(fpc_dataset* data) { delete data; }

void fpc_estimate_options_init(fpc_estimate_options* o) {
  if (!o) return;
  *o = fpc_estimate_options{};
  o->model = FPC_MODEL_OLS;
  o->intercept = 1;
  o->oneway_case = 2;
  o->twoway_case = 2;
  o->level = 0.95;
  o->attrs_intercept = 1;
}

fpc_status fpc_estimate(const fpc_dataset* data, const fpc_estimate_options* options,
                        fpc_report** out) {
  return guarded([&] {
    require(data && options && out, "null argument");
    *out = nullptr;
    const fpc_estimate_options& o = *options;
    require(o.level > 0.0 && o.level < 1.0, "confidence level must lie in (0, 1)");
    require(o.n_families == 0 || o.families != nullptr, "family list is null");
    std::vector<fpc_family> families(o.families, o.families + o.n_families);
    if (families.empty()) families.push_back(FPC_FAMILY_EHW);
    const fpc::ObservedDataset& d = data->data;
    for (fpc_family f : families)
      if (d.clusters.one_way && two_way_family(f))
        throw fpc::Error(fpc::ErrorCode::Input,
                         std::string(family_spec(f).label) + " needs an H cluster column");

    const fpc::FittedModel model = fit(*data, o);
    const fpc::ScoreBundle scores = fpc::generic_scores(model);
    fpc::AdjustmentInputs in = fpc::make_adjustment_inputs(scores.scores, data->attrs, d.clusters, d.meta);
    in.z_names = data->attr_names;
    in.projection.prepend_intercept = o.attrs_intercept != 0;
    in.projection.strict = o.strict_projection != 0;

    auto report = std::make_unique<fpc_report>();
    for (fpc_family f : families) {
      const FamilySpec spec = family_spec(f);
      append_rows(report->rows, model.names, model.theta, coef_variance(spec, o, scores, d.clusters, in),
                  spec.label, o.level);
    }
    if (o.ape) {
      if (model.kind != fpc::ModelKind::Probit)
        throw fpc::Error(fpc::ErrorCode::Input, "average partial effects need the probit model");
      require(d.x.cols() >= 1, "average partial effects need an assignment column");
      const int col = o.intercept ? 1 : 0;
      const fpc::ApeResult ape = fpc::probit_ape_binary(model, scores, col, o.ape_treated_only != 0);
      const std::vector<std::string> target{"ape:" + model.names[static_cast<std::size_t>(col)]};
      for (fpc_family f : families) {
        const FamilySpec spec = family_spec(f);
        fpc::ApeVarianceRequest req;
        req.family = spec.family;
        req.dim = spec.dim;
        req.case_id = spec.family == fpc::Family::AdjOneWay ? o.oneway_case : o.twoway_case;
        req.shrink = &in;
        append_rows(report->rows, target, ape.gamma, fpc::ape_variance(ape, d.clusters, req),
                    spec.label, o.level);
      }
    }
    *out = report.release();
  });
}

size_t fpc_report_rows(const fpc_report* report) { return report ? report->rows.size() : 0; }

fpc_status fpc_report_row_at(const fpc_report* report, size_t i, fpc_report_row* out) {
  return guarded([&] {
    require(report && out, "null argument");
    require(i < report->rows.size(), "row index out of range");
    const fpc::EstimateRow& r = report->rows[i];
    *out = fpc_report_row{r.target.c_str(), r.family.c_str(), r.estimate,  r.se,
                          r.dof,            r.critical_value, r.ci_lower, r.ci_upper,
                          r.flags.c_str()};
  });
}

fpc_status fpc_report_write(const fpc_report* report, const char* path, const char* format) {
  return guarded([&] {
    require(report && path && format, "null argument");
    fpc::write_text(path, fpc::estimate_table(report->rows, fpc::parse_format(format)));
  });
}

void fpc_report_free(fpc_report* report) { delete report; }

fpc_status fpc_simulate_range(const char* design, uint64_t first, uint64_t count, uint64_t seed,
                              int workers, double level, fpc_summary** out) {
  return guarded([&] {
    require(design && out, "null argument");
    *out = nullptr;
    require(count > 0, "number of replications must be positive");
    require(level > 0.0 && level < 1.0, "confidence level must lie in (0, 1)");
    const fpc::Study study(fpc::parse_design(design), seed);
    auto s = std::make_unique<fpc_summary>();
    s->table = fpc::summarize(study, fpc::run_replications(study, first, count, workers), level);
    *out = s.release();
  });
}

fpc_status fpc_simulate(const char* design, uint64_t reps, uint64_t seed, int workers, double level,
                        fpc_summary** out) {
  return fpc_simulate_range(design, 0, reps, seed, workers, level, out);
}

size_t fpc_summary_rows(const fpc_summary* s) { return s ? s->table.rows.size() : 0; }

fpc_status fpc_summary_row_at(const fpc_summary* s, size_t i, fpc_summary_row* out) {
  return guarded([&] {
    require(s && out, "null argument");
    require(i < s->table.rows.size(), "row index out of range");
    const fpc::SummaryRow& r = s->table.rows[i];
    *out = fpc_summary_row{r.target.c_str(), r.family.c_str(), r.truth, r.mean_se, r.coverage,
                           r.sd,             r.reps,           r.nan_se};
  });
}

uint64_t fpc_summary_failed_reps(const fpc_summary* s) { return s ? s->table.failed_reps : 0; }

int fpc_summary_sd_undefined(const fpc_summary* s) { return s && s->table.sd_undefined ? 1 : 0; }

fpc_status fpc_summary_write(const fpc_summary* s, const char* path, const char* format) {
  return guarded([&] {
    require(s && path && format, "null argument");
    fpc::write_text(path, fpc::summary_table(s->table, fpc::parse_format(format)));
  });
}

void fpc_summary_free(fpc_summary* s) { delete s; }

}  // extern "C"
