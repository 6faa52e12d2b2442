#include "med/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace med::nn {

namespace {

void check(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace

Tape::Id Tape::push(Tensor value, std::function<void(Tape&)> back) {
  Node n;
  n.grad = Tensor(value.shape());
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

Tape::Id Tape::leaf(const Tensor& param) {
  auto it = leaves_.find(&param);
  if (it != leaves_.end()) return it->second;
  Node n;
  n.ref = &param;
  n.grad = Tensor(param.shape());
  nodes_.push_back(std::move(n));
  const Id id = nodes_.size() - 1;
  leaves_.emplace(&param, id);
  return id;
}

Tape::Id Tape::constant(Tensor value) { return push(std::move(value), nullptr); }

Tape::Id Tape::row(Id matrix, std::size_t r) {
  const Tensor& m = value(matrix);
  check(m.rank() == 2, "row: need a matrix");
  check(r < m.rows(), "row: index out of range");
  const std::size_t c = m.cols();
  Tensor out = Tensor::vector(c);
  for (std::size_t j = 0; j < c; ++j) out[j] = m.at(r, j);
  const Id id = push(std::move(out), nullptr);
  nodes_[id].back = [id, matrix, r, c](Tape& t) {
    const Tensor& g = t.grad(id);
    Tensor& gm = t.grad_mut(matrix);
    for (std::size_t j = 0; j < c; ++j) gm.at(r, j) += g[j];
  };
  return id;
}

Tape::Id Tape::matvec(Id m, Id x) {
  const Tensor& w = value(m);
  const Tensor& v = value(x);
  check(w.rank() == 2 && v.rank() == 1, "matvec: need matrix and vector");
  check(w.cols() == v.numel(), "matvec: shape mismatch");
  const std::size_t rows = w.rows(), cols = w.cols();
  Tensor out = Tensor::vector(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* wr = w.data() + i * cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += wr[j] * v[j];
    out[i] = acc;
  }
  const Id id = push(std::move(out), nullptr);
  nodes_[id].back = [id, m, x, rows, cols](Tape& t) {
    const Tensor& g = t.grad(id);
    const Tensor& w = t.value(m);
    const Tensor& v = t.value(x);
    Tensor& gw = t.grad_mut(m);
    Tensor& gx = t.grad_mut(x);
    for (std::size_t i = 0; i < rows; ++i) {
      const double gi = g[i];
      if (gi == 0.0) continue;
      const double* wr = w.data() + i * cols;
      double* gwr = gw.data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) {
        gwr[j] += gi * v[j];
        gx[j] += gi * wr[j];
      }
    }
  };
  return id;
}

Tape::Id Tape::add(Id a, Id b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  check(va.same_shape(vb), "add: shape mismatch");
  Tensor out = va;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += vb[i];
  const Id id = push(std::move(out), nullptr);
  nodes_[id].back = [id, a, b](Tape& t) {
    const Tensor& g = t.grad(id);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  };
  return id;
}

Tape::Id Tape::mul(Id a, Id b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  check(va.same_shape(vb), "mul: shape mismatch");
  Tensor out = va;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= vb[i];
  const Id id = push(std::move(out), nullptr);
  nodes_[id].back = [id, a, b](Tape& t) {
    const Tensor& g = t.grad(id);
    const Tensor& va = t.value(a);
    const Tensor& vb = t.value(b);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      ga[i] += g[i] * vb[i];
      gb[i] += g[i] * va[i];
    }
  };
  return id;
}

Tape::Id Tape::lerp(Id gate, Id a, Id b) {
  const Tensor& vg = value(gate);
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  check(vg.same_shape(va) && va.same_shape(vb), "lerp: shape mismatch");
  Tensor out = va;
  for (std::size_t i = 0; i < out.numel(); ++i)
    out[i] = (1.0 - vg[i]) * va[i] + vg[i] * vb[i];
  const Id id = push(std::move(out), nullptr);
  nodes_[id].back = [id, gate, a, b](Tape& t) {
    const Tensor& g = t.grad(id);
    const Tensor& vg = t.value(gate);
    const Tensor& va = t.value(a);
    const Tensor& vb = t.value(b);
    Tensor& ggate = t.grad_mut(gate);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      ggate[i] += g[i] * (vb[i] - va[i]);
      ga[i] += g[i] * (1.0 - vg[i]);
      gb[i] += g[i] * vg[i];
    }
  };
  return id;
}

Tape::Id Tape::sigmoid(Id a) {
  Tensor out = value(a);
  for (std::size_t i = 0; i < out.numel(); ++i)
    out[i] = 1.0 / (1.0 + std::exp(-out[i]));
  const Id id = push(std::move(out), nullptr);
  nodes_[id].back = [id, a](Tape& t) {
    const Tensor& g = t.grad(id);
    const Tensor& y = t.value(id);
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < g.numel(); ++i)
      ga[i] += g[i] * y[i] * (1.0 - y[i]);
  };
  return id;
}

Tape::Id Tape::tanh(Id a) {
  Tensor out = value(a);
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(out[i]);
  const Id id = push(std::move(out), nullptr);
  nodes_[id].back = [id, a](Tape& t) {
    const Tensor& g = t.grad(id);
    const Tensor& y = t.value(id);
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < g.numel(); ++i)
      ga[i] += g[i] * (1.0 - y[i] * y[i]);
  };
  return id;
}

Tape::Id Tape::concat(const std::vector<Id>& parts) {
  check(!parts.empty(), "concat: no parts");
  std::size_t n = 0;
  for (Id p : parts) {
    check(value(p).rank() == 1, "concat: need vectors");
    n += value(p).numel();
  }
  Tensor out = Tensor::vector(n);
  std::size_t off = 0;
  for (Id p : parts) {
    const Tensor& v = value(p);
    for (std::size_t i = 0; i < v.numel(); ++i) out[off + i] = v[i];
    off += v.numel();
  }
  const Id id = push(std::move(out), nullptr);
  nodes_[id].back = [id, parts](Tape& t) {
    const Tensor& g = t.grad(id);
    std::size_t off = 0;
    for (Id p : parts) {
      Tensor& gp = t.grad_mut(p);
      for (std::size_t i = 0; i < gp.numel(); ++i) gp[i] += g[off + i];
      off += gp.numel();
    }
  };
  return id;
}

Tape::Id Tape::dot(Id a, Id b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  check(va.rank() == 1 && va.same_shape(vb), "dot: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < va.numel(); ++i) acc += va[i] * vb[i];
  Tensor out = Tensor::vector(1);
  out[0] = acc;
  const Id id = push(std::move(out), nullptr);
  nodes_[id].back = [id, a, b](Tape& t) {
    const double g = t.grad(id)[0];
    const Tensor& va = t.value(a);
    const Tensor& vb = t.value(b);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (std::size_t i = 0; i < va.numel(); ++i) {
      ga[i] += g * vb[i];
      gb[i] += g * va[i];
    }
  };
  return id;
}

Tape::Id Tape::max_elem(Id a, Id b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  check(va.same_shape(vb), "max_elem: shape mismatch");
  Tensor out = va;
  for (std::size_t i = 0; i < out.numel(); ++i)
    out[i] = va[i] >= vb[i] ? va[i] : vb[i];
  const Id id = push(std::move(out), nullptr);
  nodes_[id].back = [id, a, b](Tape& t) {
    const Tensor& g = t.grad(id);
    const Tensor& va = t.value(a);
    const Tensor& vb = t.value(b);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      if (va[i] >= vb[i]) {
        ga[i] += g[i];
      } else {
        gb[i] += g[i];
      }
    }
  };
  return id;
}

Tape::Id Tape::scale(Id a, double s) {
  Tensor out = value(a);
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= s;
  const Id id = push(std::move(out), nullptr);
  nodes_[id].back = [id, a, s](Tape& t) {
    const Tensor& g = t.grad(id);
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * s;
  };
  return id;
}

Tape::Id Tape::sum(const std::vector<Id>& scalars) {
  check(!scalars.empty(), "sum: no terms");
  double acc = 0.0;
  for (Id s : scalars) {
    check(value(s).numel() == 1, "sum: need scalars");
    acc += value(s)[0];
  }
  Tensor out = Tensor::vector(1);
  out[0] = acc;
  const Id id = push(std::move(out), nullptr);
  nodes_[id].back = [id, scalars](Tape& t) {
    const double g = t.grad(id)[0];
    for (Id s : scalars) t.grad_mut(s)[0] += g;
  };
  return id;
}

Tape::Id Tape::attend(const std::vector<Id>& energies,
                      const std::vector<Id>& annotations, Tensor* weights_out) {
  check(!energies.empty() && energies.size() == annotations.size(),
        "attend: need matching energies and annotations");
  const std::size_t steps = energies.size();
  const std::size_t dim = value(annotations[0]).numel();
  double max_e = value(energies[0])[0];
  for (Id e : energies) {
    check(value(e).numel() == 1, "attend: energies must be scalar");
    max_e = std::max(max_e, value(e)[0]);
  }
  Tensor weights = Tensor::vector(steps);
  double z = 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    weights[j] = std::exp(value(energies[j])[0] - max_e);
    z += weights[j];
  }
  for (std::size_t j = 0; j < steps; ++j) weights[j] /= z;
  Tensor out = Tensor::vector(dim);
  for (std::size_t j = 0; j < steps; ++j) {
    const Tensor& h = value(annotations[j]);
    check(h.numel() == dim, "attend: annotation dim mismatch");
    for (std::size_t i = 0; i < dim; ++i) out[i] += weights[j] * h[i];
  }
  if (weights_out) *weights_out = weights;
  const Id id = push(std::move(out), nullptr);
  nodes_[id].back = [id, energies, annotations, weights, dim](Tape& t) {
    const Tensor& dc = t.grad(id);
    const std::size_t steps = energies.size();
    // d(alpha_j) = h_j . dc, then softmax jacobian to the energies:
    // de_j = alpha_j * (dalpha_j - sum_k alpha_k dalpha_k).
    std::vector<double> dalpha(steps, 0.0);
    double mix = 0.0;
    for (std::size_t j = 0; j < steps; ++j) {
      const Tensor& h = t.value(annotations[j]);
      Tensor& gh = t.grad_mut(annotations[j]);
      double d = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        d += h[i] * dc[i];
        gh[i] += weights[j] * dc[i];
      }
      dalpha[j] = d;
      mix += weights[j] * d;
    }
    for (std::size_t j = 0; j < steps; ++j)
      t.grad_mut(energies[j])[0] += weights[j] * (dalpha[j] - mix);
  };
  return id;
}

Tape::Id Tape::softmax_xent(Id logits, std::size_t gold, Tensor* probs_out) {
  const Tensor& l = value(logits);
  check(l.rank() == 1, "softmax_xent: need a vector of logits");
  if (gold >= l.numel())
    throw std::out_of_range("softmax_xent: gold id out of range");
  double max_l = l[0];
  for (std::size_t i = 1; i < l.numel(); ++i) max_l = std::max(max_l, l[i]);
  double z = 0.0;
  Tensor probs = Tensor::vector(l.numel());
  for (std::size_t i = 0; i < l.numel(); ++i) {
    probs[i] = std::exp(l[i] - max_l);
    z += probs[i];
  }
  for (std::size_t i = 0; i < l.numel(); ++i) probs[i] /= z;
  // Loss in log space, log(z) - (l[gold] - max), so nothing ever hits log(0).
  Tensor out = Tensor::vector(1);
  out[0] = std::log(z) - (l[gold] - max_l);
  if (probs_out) *probs_out = probs;
  const Id id = push(std::move(out), nullptr);
  nodes_[id].back = [id, logits, gold, probs](Tape& t) {
    const double g = t.grad(id)[0];
    Tensor& gl = t.grad_mut(logits);
    for (std::size_t i = 0; i < gl.numel(); ++i) {
      const double onehot = i == gold ? 1.0 : 0.0;
      gl[i] += g * (probs[i] - onehot);
    }
  };
  return id;
}

void Tape::backward(Id root) {
  check(!backward_done_, "backward: tape already differentiated");
  backward_done_ = true;
  check(value(root).numel() == 1, "backward: root must be scalar");
  grad_mut(root)[0] = 1.0;
  for (std::size_t i = root + 1; i-- > 0;) {
    if (nodes_[i].back) nodes_[i].back(*this);
  }
}

const Tensor* Tape::grad_of(const Tensor& param) const {
  auto it = leaves_.find(&param);
  return it == leaves_.end() ? nullptr : &nodes_[it->second].grad;
}

}  // namespace med::nn
