#include "med/adadelta.hpp"

#include <cmath>
#include <stdexcept>

namespace med::nn {

double global_norm(const std::vector<const Tensor*>& grads) {
  double sq = 0.0;
  for (const Tensor* g : grads) {
    if (!g) continue;
    for (std::size_t i = 0; i < g->numel(); ++i) sq += (*g)[i] * (*g)[i];
  }
  return std::sqrt(sq);
}

double clip_global_norm(const std::vector<const Tensor*>& grads,
                        double max_norm) {
  if (max_norm <= 0.0) return 1.0;
  const double norm = global_norm(grads);
  return norm > max_norm ? max_norm / norm : 1.0;
}

Adadelta::Adadelta(std::vector<Tensor*> params, AdadeltaConfig config)
    : params_(std::move(params)), config_(config) {
  if (config_.rho < 0.0 || config_.rho >= 1.0)
    throw std::invalid_argument("adadelta: rho must be in [0, 1)");
  if (config_.epsilon <= 0.0)
    throw std::invalid_argument("adadelta: epsilon must be positive");
  acc_grad_.reserve(params_.size());
  acc_update_.reserve(params_.size());
  for (Tensor* p : params_) {
    if (!p) throw std::invalid_argument("adadelta: null parameter");
    acc_grad_.emplace_back(p->shape());
    acc_update_.emplace_back(p->shape());
  }
}

void Adadelta::step(const std::vector<const Tensor*>& grads, double clip_norm) {
  if (grads.size() != params_.size())
    throw std::invalid_argument("adadelta: gradient count mismatch");
  const double factor = clip_global_norm(grads, clip_norm);
  const double rho = config_.rho;
  const double eps = config_.epsilon;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor& p = *params_[k];
    Tensor& eg = acc_grad_[k];
    Tensor& eu = acc_update_[k];
    if (grads[k] && !grads[k]->same_shape(p))
      throw std::invalid_argument("adadelta: gradient shape mismatch");
    for (std::size_t i = 0; i < p.numel(); ++i) {
      const double g = grads[k] ? (*grads[k])[i] * factor : 0.0;
      eg[i] = rho * eg[i] + (1.0 - rho) * g * g;
      const double d = -std::sqrt(eu[i] + eps) / std::sqrt(eg[i] + eps) * g;
      eu[i] = rho * eu[i] + (1.0 - rho) * d * d;
      p[i] += d;
    }
  }
}

}  // namespace med::nn
