#include "tcm/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tcm {

const Tensor& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Tensor value) {
    Node n;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::param(Parameter& p) {
    if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
    Node n;
    n.external = &p.value;
    n.param = &p;
    n.needs_grad = grad_enabled_;
    nodes_.push_back(std::move(n));
    const int id = static_cast<int>(nodes_.size() - 1);
    param_nodes_.emplace(&p, id);
    return Var(this, id);
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
    return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(fn));
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn fn) {
    Node n;
    n.value = std::move(value);
    if (grad_enabled_) {
        for (const Var& v : inputs) {
            if (v.tape() != this) throw std::logic_error("Tape::record: input from another tape");
            if (nodes_[v.id()].needs_grad) {
                n.needs_grad = true;
                break;
            }
        }
    }
    if (n.needs_grad) n.backward = std::move(fn);
    nodes_.push_back(std::move(n));
    return Var(this, static_cast<int>(nodes_.size() - 1));
}

const Tensor& Tape::value(int id) const {
    const Node& n = nodes_[id];
    return n.external ? *n.external : n.value;
}

Tensor& Tape::grad(int id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) {
        const Tensor& v = value(id);
        n.grad = Tensor(v.rows(), v.cols());
    }
    return n.grad;
}

void Tape::backward(Var loss) {
    if (loss.tape() != this) throw std::logic_error("Tape::backward: loss from another tape");
    if (backward_done_) throw std::logic_error("Tape::backward: called twice on one tape");
    const Tensor& lv = value(loss.id());
    if (lv.size() != 1) throw std::invalid_argument("Tape::backward: loss must be scalar, got " + lv.shape_string());
    backward_done_ = true;
    if (!nodes_[loss.id()].needs_grad) return;
    grad(loss.id())[0] = 1.0;
    for (int id = loss.id(); id >= 0; --id) {
        Node& n = nodes_[id];
        if (!n.needs_grad || n.grad.empty()) continue;
        if (n.param) {
            n.param->grad.add_inplace(n.grad);
        } else if (n.backward) {
            n.backward(*this, n.grad);
        }
    }
}

namespace ad {
namespace {

void require(bool ok, const char* op, const std::string& detail) {
    if (!ok) throw std::invalid_argument(std::string(op) + ": " + detail);
}

Tape& tape_of(Var a) {
    require(a.valid(), "autodiff", "invalid Var");
    return *a.tape();
}

}  // namespace

Var matmul(Var a, Var b) {
    Tape& t = tape_of(a);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    require(av.cols() == bv.rows(), "matmul", av.shape_string() + " * " + bv.shape_string());
    Tensor out = tcm::matmul(av, bv);
    return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
        const Tensor& A = tp.value(a.id());
        const Tensor& B = tp.value(b.id());
        const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
        if (tp.needs_grad(a)) {
            Tensor& ga = tp.grad(a);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    const Real gij = g(i, j);
                    if (gij == 0.0) continue;
                    for (std::size_t p = 0; p < k; ++p) ga(i, p) += gij * B(p, j);
                }
        }
        if (tp.needs_grad(b)) {
            Tensor& gb = tp.grad(b);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    const Real aip = A(i, p);
                    if (aip == 0.0) continue;
                    for (std::size_t j = 0; j < m; ++j) gb(p, j) += aip * g(i, j);
                }
        }
    });
}

Var transpose(Var a) {
    Tape& t = tape_of(a);
    return t.record(tcm::transpose(a.value()), {a}, [a](Tape& tp, const Tensor& g) {
        Tensor& ga = tp.grad(a);
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) ga(j, i) += g(i, j);
    });
}

Var add(Var a, Var b) {
    Tape& t = tape_of(a);
    require(a.value().same_shape(b.value()), "add", a.value().shape_string() + " + " + b.value().shape_string());
    Tensor out = a.value();
    out.add_inplace(b.value());
    return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
        if (tp.needs_grad(a)) tp.grad(a).add_inplace(g);
        if (tp.needs_grad(b)) tp.grad(b).add_inplace(g);
    });
}

Var sub(Var a, Var b) {
    Tape& t = tape_of(a);
    require(a.value().same_shape(b.value()), "sub", a.value().shape_string() + " - " + b.value().shape_string());
    Tensor out = a.value();
    out.add_inplace(b.value(), -1.0);
    return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
        if (tp.needs_grad(a)) tp.grad(a).add_inplace(g);
        if (tp.needs_grad(b)) tp.grad(b).add_inplace(g, -1.0);
    });
}

Var mul(Var a, Var b) {
    Tape& t = tape_of(a);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    require(av.same_shape(bv), "mul", av.shape_string() + " .* " + bv.shape_string());
    Tensor out(av.rows(), av.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
    return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
        const Tensor& A = tp.value(a.id());
        const Tensor& B = tp.value(b.id());
        if (tp.needs_grad(a)) {
            Tensor& ga = tp.grad(a);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * B[i];
        }
        if (tp.needs_grad(b)) {
            Tensor& gb = tp.grad(b);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * A[i];
        }
    });
}

Var scale(Var a, Real s) {
    Tape& t = tape_of(a);
    Tensor out = a.value();
    for (auto& v : out.data()) v *= s;
    return t.record(std::move(out), {a}, [a, s](Tape& tp, const Tensor& g) { tp.grad(a).add_inplace(g, s); });
}

Var scale_by(Var a, Var s) {
    Tape& t = tape_of(a);
    require(s.value().size() == 1, "scale_by", "scale must be 1x1, got " + s.value().shape_string());
    const Real sv = s.value()[0];
    Tensor out = a.value();
    for (auto& v : out.data()) v *= sv;
    return t.record(std::move(out), {a, s}, [a, s](Tape& tp, const Tensor& g) {
        const Real sv = tp.value(s.id())[0];
        if (tp.needs_grad(a)) tp.grad(a).add_inplace(g, sv);
        if (tp.needs_grad(s)) {
            const Tensor& A = tp.value(a.id());
            Real acc = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * A[i];
            tp.grad(s)[0] += acc;
        }
    });
}

Var one_minus(Var a) {
    Tape& t = tape_of(a);
    Tensor out = a.value();
    for (auto& v : out.data()) v = 1.0 - v;
    return t.record(std::move(out), {a}, [a](Tape& tp, const Tensor& g) { tp.grad(a).add_inplace(g, -1.0); });
}

Var sigmoid(Var a) {
    Tape& t = tape_of(a);
    Tensor out = a.value();
    for (auto& v : out.data()) v = 1.0 / (1.0 + std::exp(-v));
    const int self = static_cast<int>(t.size());
    return t.record(std::move(out), {a}, [a, self](Tape& tp, const Tensor& g) {
        const Tensor& y = tp.value(self);
        Tensor& ga = tp.grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
    });
}

Var tanh(Var a) {
    Tape& t = tape_of(a);
    Tensor out = a.value();
    for (auto& v : out.data()) v = std::tanh(v);
    const int self = static_cast<int>(t.size());
    return t.record(std::move(out), {a}, [a, self](Tape& tp, const Tensor& g) {
        const Tensor& y = tp.value(self);
        Tensor& ga = tp.grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
    });
}

Var softmax(Var a, Axis axis) {
    Tape& t = tape_of(a);
    const Tensor& av = a.value();
    require(av.all_finite(), "softmax", "non-finite input");
    Tensor out(av.rows(), av.cols());
    const bool by_col = axis == Axis::kCols;
    const std::size_t outer = by_col ? av.cols() : av.rows();
    const std::size_t inner = by_col ? av.rows() : av.cols();
    auto at = [&](Tensor& m, std::size_t o, std::size_t i) -> Real& { return by_col ? m(i, o) : m(o, i); };
    auto cat = [&](const Tensor& m, std::size_t o, std::size_t i) -> Real { return by_col ? m(i, o) : m(o, i); };
    for (std::size_t o = 0; o < outer; ++o) {
        Real mx = cat(av, o, 0);
        for (std::size_t i = 1; i < inner; ++i) mx = std::max(mx, cat(av, o, i));
        Real z = 0.0;
        for (std::size_t i = 0; i < inner; ++i) {
            const Real e = std::exp(cat(av, o, i) - mx);
            at(out, o, i) = e;
            z += e;
        }
        for (std::size_t i = 0; i < inner; ++i) at(out, o, i) /= z;
    }
    const int self = static_cast<int>(t.size());
    return t.record(std::move(out), {a}, [a, self, by_col](Tape& tp, const Tensor& g) {
        // dx_i = y_i * (g_i - sum_k g_k y_k) along each distribution
        const Tensor& y = tp.value(self);
        Tensor& ga = tp.grad(a);
        const std::size_t outer = by_col ? y.cols() : y.rows();
        const std::size_t inner = by_col ? y.rows() : y.cols();
        for (std::size_t o = 0; o < outer; ++o) {
            Real dot = 0.0;
            for (std::size_t i = 0; i < inner; ++i) {
                const std::size_t k = by_col ? i * y.cols() + o : o * y.cols() + i;
                dot += g[k] * y[k];
            }
            for (std::size_t i = 0; i < inner; ++i) {
                const std::size_t k = by_col ? i * y.cols() + o : o * y.cols() + i;
                ga[k] += y[k] * (g[k] - dot);
            }
        }
    });
}

Var sum(Var a) {
    Tape& t = tape_of(a);
    Tensor out(1, 1, a.value().sum());
    return t.record(std::move(out), {a}, [a](Tape& tp, const Tensor& g) {
        Tensor& ga = tp.grad(a);
        for (auto& v : ga.data()) v += g[0];
    });
}

Var add_n(std::span<const Var> terms) {
    require(!terms.empty(), "add_n", "no terms");
    Tape& t = tape_of(terms[0]);
    Tensor out = terms[0].value();
    for (std::size_t i = 1; i < terms.size(); ++i) {
        require(terms[i].value().same_shape(out), "add_n", "shape mismatch");
        out.add_inplace(terms[i].value());
    }
    std::vector<Var> ins(terms.begin(), terms.end());
    return t.record(std::move(out), terms, [ins](Tape& tp, const Tensor& g) {
        for (const Var& v : ins)
            if (tp.needs_grad(v)) tp.grad(v).add_inplace(g);
    });
}

Var concat_rows(std::span<const Var> parts) {
    require(!parts.empty(), "concat_rows", "no parts");
    Tape& t = tape_of(parts[0]);
    const std::size_t cols = parts[0].value().cols();
    std::size_t rows = 0;
    for (const Var& p : parts) {
        require(p.value().cols() == cols, "concat_rows", "column count mismatch");
        rows += p.value().rows();
    }
    Tensor out(rows, cols);
    std::size_t off = 0;
    for (const Var& p : parts) {
        const Tensor& v = p.value();
        std::copy(v.data().begin(), v.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(off * cols));
        off += v.rows();
    }
    std::vector<Var> ins(parts.begin(), parts.end());
    return t.record(std::move(out), parts, [ins](Tape& tp, const Tensor& g) {
        std::size_t off = 0;
        const std::size_t cols = g.cols();
        for (const Var& p : ins) {
            const std::size_t n = tp.value(p.id()).size();
            if (tp.needs_grad(p)) {
                Tensor& gp = tp.grad(p);
                for (std::size_t k = 0; k < n; ++k) gp[k] += g[off * cols + k];
            }
            off += n / cols;
        }
    });
}

Var concat_cols(std::span<const Var> parts) {
    require(!parts.empty(), "concat_cols", "no parts");
    Tape& t = tape_of(parts[0]);
    const std::size_t rows = parts[0].value().rows();
    std::size_t cols = 0;
    for (const Var& p : parts) {
        require(p.value().rows() == rows, "concat_cols", "row count mismatch");
        cols += p.value().cols();
    }
    Tensor out(rows, cols);
    std::size_t off = 0;
    for (const Var& p : parts) {
        const Tensor& v = p.value();
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < v.cols(); ++j) out(i, off + j) = v(i, j);
        off += v.cols();
    }
    std::vector<Var> ins(parts.begin(), parts.end());
    return t.record(std::move(out), parts, [ins](Tape& tp, const Tensor& g) {
        std::size_t off = 0;
        for (const Var& p : ins) {
            const std::size_t c = tp.value(p.id()).cols();
            if (tp.needs_grad(p)) {
                Tensor& gp = tp.grad(p);
                for (std::size_t i = 0; i < g.rows(); ++i)
                    for (std::size_t j = 0; j < c; ++j) gp(i, j) += g(i, off + j);
            }
            off += c;
        }
    });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
    Tape& t = tape_of(a);
    const Tensor& av = a.value();
    require(begin + count <= av.rows(), "slice_rows", "range past " + av.shape_string());
    const std::size_t cols = av.cols();
    Tensor out(count, cols);
    std::copy(av.data().begin() + static_cast<std::ptrdiff_t>(begin * cols),
              av.data().begin() + static_cast<std::ptrdiff_t>((begin + count) * cols), out.data().begin());
    return t.record(std::move(out), {a}, [a, begin](Tape& tp, const Tensor& g) {
        Tensor& ga = tp.grad(a);
        const std::size_t off = begin * g.cols();
        for (std::size_t k = 0; k < g.size(); ++k) ga[off + k] += g[k];
    });
}

Var column(Var a, std::size_t j) {
    Tape& t = tape_of(a);
    const Tensor& av = a.value();
    require(j < av.cols(), "column", "index past " + av.shape_string());
    Tensor out(av.rows(), 1);
    for (std::size_t i = 0; i < av.rows(); ++i) out[i] = av(i, j);
    return t.record(std::move(out), {a}, [a, j](Tape& tp, const Tensor& g) {
        Tensor& ga = tp.grad(a);
        for (std::size_t i = 0; i < g.rows(); ++i) ga(i, j) += g[i];
    });
}

Var embedding(Var table, std::size_t index) {
    Tape& t = tape_of(table);
    const Tensor& tv = table.value();
    require(index < tv.rows(), "embedding", "index " + std::to_string(index) + " past " + tv.shape_string());
    const std::size_t d = tv.cols();
    Tensor out(d, 1);
    for (std::size_t k = 0; k < d; ++k) out[k] = tv(index, k);
    return t.record(std::move(out), {table}, [table, index](Tape& tp, const Tensor& g) {
        Tensor& gt = tp.grad(table);
        for (std::size_t k = 0; k < g.size(); ++k) gt(index, k) += g[k];
    });
}

Var scatter_add(Var v, std::span<const std::size_t> index, std::size_t out_size) {
    Tape& t = tape_of(v);
    const Tensor& vv = v.value();
    require(vv.cols() == 1 && vv.rows() == index.size(), "scatter_add", "index/value length mismatch");
    Tensor out(out_size, 1);
    for (std::size_t i = 0; i < index.size(); ++i) {
        require(index[i] < out_size, "scatter_add", "index out of range");
        out[index[i]] += vv[i];
    }
    std::vector<std::size_t> idx(index.begin(), index.end());
    return t.record(std::move(out), {v}, [v, idx = std::move(idx)](Tape& tp, const Tensor& g) {
        Tensor& gv = tp.grad(v);
        for (std::size_t i = 0; i < idx.size(); ++i) gv[i] += g[idx[i]];
    });
}

Var masked_nll(Var probs, std::span<const std::size_t> targets, std::span<const Real> mask) {
    Tape& t = tape_of(probs);
    const Tensor& pv = probs.value();
    require(targets.size() == pv.cols() && mask.size() == pv.cols(), "masked_nll",
            "targets/mask length must equal column count");
    static constexpr Real kFloor = 1e-300;
    Real total = 0.0, weight = 0.0;
    for (std::size_t c = 0; c < pv.cols(); ++c) {
        if (mask[c] == 0.0) continue;
        require(targets[c] < pv.rows(), "masked_nll", "target index out of range");
        total += -mask[c] * std::log(std::max(pv(targets[c], c), kFloor));
        weight += mask[c];
    }
    const Real denom = weight > 0.0 ? weight : 1.0;
    std::vector<std::size_t> tg(targets.begin(), targets.end());
    std::vector<Real> mk(mask.begin(), mask.end());
    return t.record(Tensor(1, 1, total / denom), {probs},
                    [probs, tg = std::move(tg), mk = std::move(mk), denom](Tape& tp, const Tensor& g) {
                        const Tensor& P = tp.value(probs.id());
                        Tensor& gp = tp.grad(probs);
                        for (std::size_t c = 0; c < tg.size(); ++c) {
                            if (mk[c] == 0.0) continue;
                            const Real p = std::max(P(tg[c], c), kFloor);
                            gp(tg[c], c) += -g[0] * mk[c] / (p * denom);
                        }
                    });
}

Var dropout(Var a, Real rate, std::mt19937_64& rng) {
    if (rate <= 0.0) return a;
    require(rate < 1.0, "dropout", "rate must be < 1");
    Tape& t = tape_of(a);
    const Tensor& av = a.value();
    Tensor keep(av.rows(), av.cols());
    std::uniform_real_distribution<Real> u(0.0, 1.0);
    const Real inv = 1.0 / (1.0 - rate);
    for (auto& k : keep.data()) k = u(rng) < rate ? 0.0 : inv;
    Tensor out(av.rows(), av.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * keep[i];
    return t.record(std::move(out), {a}, [a, keep = std::move(keep)](Tape& tp, const Tensor& g) {
        Tensor& ga = tp.grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * keep[i];
    });
}

}  // namespace ad
}  // namespace tcm
