#include "sgmmq/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sgmmq/errors.hpp"
#include "sgmmq/rng.hpp"
#include "sgmmq/spd.hpp"

namespace sgmmq {

double gaussian_eval(const ParameterPoint& p, std::size_t k, const Vector& s) {
  if (k >= p.component_count()) throw ContractViolation("gaussian_eval: component index out of range");
  if (s.size() != p.state_dim()) throw ContractViolation("gaussian_eval: state dimension mismatch");
  Vector d(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) d[i] = s[i] - p.means(i, k);
  return detail::gauss_from_quad(quad_form(p.covs[k], d));
}

Matrix effective_weights(const ParameterPoint& p) {
  const std::size_t k = p.component_count();
  const std::size_t na = p.action_count();
  Matrix xi(k, na, 1.0);
  for (const Matrix& u : p.upsilon)
    for (std::size_t i = 0; i < xi.size(); ++i) xi.data()[i] *= u.data()[i];
  return xi;
}

Vector q_values(const ParameterPoint& p, const Vector& s) {
  if (s.size() != p.state_dim()) throw ContractViolation("q_values: state dimension mismatch");
  const std::size_t kc = p.component_count();
  const std::size_t na = p.action_count();
  const std::size_t j = p.factor_count();
  Vector q(na, 0.0);
  Vector d(s.size());
  for (std::size_t k = 0; k < kc; ++k) {
    for (std::size_t i = 0; i < s.size(); ++i) d[i] = s[i] - p.means(i, k);
    const double g = detail::gauss_from_quad(quad_form(p.covs[k], d));
    if (g == 0.0) continue;
    for (std::size_t a = 0; a < na; ++a) {
      double xi = p.upsilon[0](k, a);
      for (std::size_t jj = 1; jj < j; ++jj) xi *= p.upsilon[jj](k, a);
      q[a] += xi * g;
    }
  }
  return q;
}

double q_eval(const ParameterPoint& p, const Vector& s, std::size_t a) {
  if (a >= p.action_count()) throw ContractViolation("q_eval: action index out of range");
  if (s.size() != p.state_dim()) throw ContractViolation("q_eval: state dimension mismatch");
  const std::size_t kc = p.component_count();
  const std::size_t j = p.factor_count();
  double q = 0.0;
  Vector d(s.size());
  for (std::size_t k = 0; k < kc; ++k) {
    double xi = p.upsilon[0](k, a);
    for (std::size_t jj = 1; jj < j; ++jj) xi *= p.upsilon[jj](k, a);
    if (xi == 0.0) continue;
    for (std::size_t i = 0; i < s.size(); ++i) d[i] = s[i] - p.means(i, k);
    q += xi * detail::gauss_from_quad(quad_form(p.covs[k], d));
  }
  return q;
}

std::size_t greedy_action(const ParameterPoint& p, const Vector& s) {
  Vector q = q_values(p, s);
  std::size_t best = 0;
  for (std::size_t a = 1; a < q.size(); ++a)
    if (q[a] > q[best]) best = a;
  return best;
}

double nonzero_fraction(const ParameterPoint& p, double tau) {
  if (tau < 0.0) throw ContractViolation("nonzero_fraction: tau must be >= 0");
  Matrix xi = effective_weights(p);
  std::size_t live = 0;
  for (std::size_t i = 0; i < xi.size(); ++i)
    if (std::abs(xi.data()[i]) > tau) ++live;
  return static_cast<double>(live) / static_cast<double>(xi.size());
}

std::size_t total_parameter_count(const ParameterPoint& p) {
  const std::size_t k = p.component_count();
  const std::size_t ds = p.state_dim();
  return k * p.action_count() + k * ds + k * ds * ds;
}

std::size_t active_parameter_count(const ParameterPoint& p, double tau) {
  if (tau < 0.0) throw ContractViolation("active_parameter_count: tau must be >= 0");
  Matrix xi = effective_weights(p);
  const std::size_t ds = p.state_dim();
  std::size_t count = 0;
  for (std::size_t k = 0; k < xi.rows(); ++k) {
    bool any_live = false;
    for (std::size_t a = 0; a < xi.cols(); ++a) {
      if (std::abs(xi(k, a)) > tau) {
        ++count;
        any_live = true;
      }
    }
    if (any_live) count += ds + ds * ds;
  }
  return count;
}

ParameterPoint init_parameters(const ModelConfig& cfg, const Vector& state_low,
                               const Vector& state_high) {
  if (cfg.K == 0 || cfg.J == 0 || cfg.state_dim == 0 || cfg.action_count < 2)
    throw ContractViolation("init_parameters: K, J, D_s must be positive and N_a >= 2");
  if (state_low.size() != cfg.state_dim || state_high.size() != cfg.state_dim)
    throw ContractViolation("init_parameters: bounds have wrong dimension");
  for (std::size_t i = 0; i < cfg.state_dim; ++i) {
    if (!std::isfinite(state_low[i]) || !std::isfinite(state_high[i]))
      throw ContractViolation("init_parameters: bounds must be finite");
    if (state_low[i] > state_high[i])
      throw ContractViolation("init_parameters: state_low exceeds state_high");
  }

  Rng root(cfg.init_seed);
  Rng mean_rng = root.spawn(1);
  Rng factor_rng = root.spawn(2);

  ParameterPoint p;
  p.means = Matrix(cfg.state_dim, cfg.K);
  for (std::size_t k = 0; k < cfg.K; ++k)
    for (std::size_t d = 0; d < cfg.state_dim; ++d)
      p.means(d, k) = mean_rng.uniform(state_low[d], state_high[d]);

  // Bandwidth of a quarter of each coordinate's range, so components resolve
  // every state dimension at the same relative scale no matter how unevenly
  // the raw units are stretched.
  SymMatrix c0(cfg.state_dim);
  for (std::size_t d = 0; d < cfg.state_dim; ++d) {
    const double bw = 0.25 * (state_high[d] - state_low[d]);
    c0.set(d, d, bw > 0.0 ? bw * bw : 1.0);
  }
  const SpdMatrix cov0(c0);
  p.covs.reserve(cfg.K);
  for (std::size_t k = 0; k < cfg.K; ++k) p.covs.push_back(cov0);

  const double u = std::pow(static_cast<double>(cfg.K), -1.0 / (2.0 * static_cast<double>(cfg.J)));
  p.upsilon.reserve(cfg.J);
  for (std::size_t j = 0; j < cfg.J; ++j) {
    Matrix m(cfg.K, cfg.action_count);
    for (std::size_t k = 0; k < cfg.K; ++k)
      for (std::size_t a = 0; a < cfg.action_count; ++a) {
        const double mag = factor_rng.uniform(0.5 * u, u);
        const bool neg = factor_rng.uniform01() < 0.5;
        m(k, a) = neg ? -mag : mag;
      }
    p.upsilon.push_back(std::move(m));
  }
  check_point(p);
  return p;
}

void save_checkpoint(const ParameterPoint& p, const std::string& path) {
  check_point(p);
  nlohmann::json j;
  j["version"] = 1;
  j["config"] = {{"K", p.component_count()},
                 {"J", p.factor_count()},
                 {"D_s", p.state_dim()},
                 {"N_a", p.action_count()}};
  nlohmann::json ups = nlohmann::json::array();
  for (const Matrix& u : p.upsilon) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t k = 0; k < u.rows(); ++k) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t a = 0; a < u.cols(); ++a) row.push_back(u(k, a));
      rows.push_back(std::move(row));
    }
    ups.push_back(std::move(rows));
  }
  j["upsilon"] = std::move(ups);
  nlohmann::json means = nlohmann::json::array();
  for (std::size_t d = 0; d < p.means.rows(); ++d) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t k = 0; k < p.means.cols(); ++k) row.push_back(p.means(d, k));
    means.push_back(std::move(row));
  }
  j["means"] = std::move(means);
  nlohmann::json covs = nlohmann::json::array();
  for (const SpdMatrix& c : p.covs) {
    nlohmann::json mat = nlohmann::json::array();
    for (std::size_t i = 0; i < c.dim(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t jj = 0; jj < c.dim(); ++jj) row.push_back(c(i, jj));
      mat.push_back(std::move(row));
    }
    covs.push_back(std::move(mat));
  }
  j["covs"] = std::move(covs);

  std::ofstream out(path);
  if (!out) throw IoError("save_checkpoint: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("save_checkpoint: write failed for " + path);
}

ParameterPoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_checkpoint: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("load_checkpoint: malformed JSON in " + path + ": " + e.what());
  }
  try {
    if (j.at("version").get<int>() != 1)
      throw IoError("load_checkpoint: unsupported version in " + path);
    const auto& cfg = j.at("config");
    const std::size_t kc = cfg.at("K").get<std::size_t>();
    const std::size_t jc = cfg.at("J").get<std::size_t>();
    const std::size_t ds = cfg.at("D_s").get<std::size_t>();
    const std::size_t na = cfg.at("N_a").get<std::size_t>();

    ParameterPoint p;
    const auto& ups = j.at("upsilon");
    if (ups.size() != jc) throw IoError("load_checkpoint: upsilon factor count mismatch");
    for (const auto& uj : ups) {
      if (uj.size() != kc) throw IoError("load_checkpoint: upsilon row count mismatch");
      Matrix m(kc, na);
      for (std::size_t k = 0; k < kc; ++k) {
        if (uj[k].size() != na) throw IoError("load_checkpoint: upsilon column count mismatch");
        for (std::size_t a = 0; a < na; ++a) m(k, a) = uj[k][a].get<double>();
      }
      p.upsilon.push_back(std::move(m));
    }
    const auto& means = j.at("means");
    if (means.size() != ds) throw IoError("load_checkpoint: means row count mismatch");
    p.means = Matrix(ds, kc);
    for (std::size_t d = 0; d < ds; ++d) {
      if (means[d].size() != kc) throw IoError("load_checkpoint: means column count mismatch");
      for (std::size_t k = 0; k < kc; ++k) p.means(d, k) = means[d][k].get<double>();
    }
    const auto& covs = j.at("covs");
    if (covs.size() != kc) throw IoError("load_checkpoint: covariance count mismatch");
    for (std::size_t k = 0; k < kc; ++k) {
      if (covs[k].size() != ds) throw IoError("load_checkpoint: covariance row count mismatch");
      Matrix m(ds, ds);
      for (std::size_t i = 0; i < ds; ++i) {
        if (covs[k][i].size() != ds) throw IoError("load_checkpoint: covariance column count mismatch");
        for (std::size_t jj = 0; jj < ds; ++jj) m(i, jj) = covs[k][i][jj].get<double>();
      }
      p.covs.emplace_back(m);  // validates SPD
    }
    check_point(p);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("load_checkpoint: schema violation in " + path + ": " + e.what());
  }
}

}  // namespace sgmmq
