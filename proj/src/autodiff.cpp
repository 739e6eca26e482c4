#include "ricci/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace ricci::ad {

namespace {

void accum(Node& self, std::size_t k, const Matrix& g) {
    Node* p = self.parents[k].get();
    if (!p->requires_grad) return;
    p->ensure_grad();
    p->grad += g;
}

Matrix broadcast_to(const Matrix& m, Eigen::Index r, Eigen::Index c) {
    if (m.rows() == r && m.cols() == c) return m;
    if (m.rows() == 1 && m.cols() == 1) return Matrix::Constant(r, c, m(0, 0));
    if (m.rows() == 1 && m.cols() == c) return m.replicate(r, 1);
    if (m.rows() == r && m.cols() == 1) return m.replicate(1, c);
    throw std::runtime_error("tensor broadcast: incompatible shapes");
}

Matrix reduce_to(const Matrix& g, Eigen::Index r, Eigen::Index c) {
    if (g.rows() == r && g.cols() == c) return g;
    if (r == 1 && c == 1) return Matrix::Constant(1, 1, g.sum());
    if (r == 1 && g.cols() == c) return g.colwise().sum();
    if (c == 1 && g.rows() == r) return g.rowwise().sum();
    throw std::runtime_error("tensor broadcast: cannot reduce gradient");
}

std::pair<Eigen::Index, Eigen::Index> common_shape(const Matrix& a, const Matrix& b) {
    auto pick = [](Eigen::Index x, Eigen::Index y) {
        if (x == y) return x;
        if (x == 1) return y;
        if (y == 1) return x;
        throw std::runtime_error("tensor broadcast: incompatible shapes");
    };
    return {pick(a.rows(), b.rows()), pick(a.cols(), b.cols())};
}

std::shared_ptr<Node> make_node(Matrix value, std::vector<std::shared_ptr<Node>> parents,
                                const char* op) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->parents = std::move(parents);
    n->op = op;
    for (const auto& p : n->parents)
        if (p->requires_grad) n->requires_grad = true;
    return n;
}

}  // namespace

Tensor Tensor::constant(Matrix v) {
    auto n = std::make_shared<Node>();
    n->value = std::move(v);
    n->op = "const";
    return Tensor(n);
}

Tensor Tensor::constant(double v) { return constant(Matrix::Constant(1, 1, v)); }

Tensor Tensor::param(Matrix v) {
    auto n = std::make_shared<Node>();
    n->value = std::move(v);
    n->requires_grad = true;
    n->op = "param";
    return Tensor(n);
}

void backward(const Tensor& out) {
    if (!out.defined() || out.value().size() != 1)
        throw std::runtime_error("backward expects a defined 1x1 tensor");
    Node* root = out.node().get();
    if (!root->requires_grad) return;

    std::vector<Node*> order;
    std::unordered_set<Node*> visited{root};
    struct Frame {
        Node* n;
        std::size_t idx;
    };
    std::vector<Frame> stack{{root, 0}};
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.idx < f.n->parents.size()) {
            Node* p = f.n->parents[f.idx++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.push_back({p, 0});
            }
        } else {
            order.push_back(f.n);
            stack.pop_back();
        }
    }
    for (Node* n : order) n->grad_ready = false;
    root->ensure_grad();
    root->grad(0, 0) = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (!n->grad_ready) continue;  // no gradient flowed here
        if (n->backward) n->backward(*n);
    }
}

// ---------------- binary elementwise ----------------

namespace {

enum class BinKind { add, sub, mul, divide };

Tensor binary(const Tensor& a, const Tensor& b, BinKind kind, const char* name) {
    auto [r, c] = common_shape(a.value(), b.value());
    Matrix av = broadcast_to(a.value(), r, c);
    Matrix bv = broadcast_to(b.value(), r, c);
    Matrix v;
    switch (kind) {
        case BinKind::add: v = av + bv; break;
        case BinKind::sub: v = av - bv; break;
        case BinKind::mul: v = av.cwiseProduct(bv); break;
        case BinKind::divide: v = av.cwiseQuotient(bv); break;
    }
    auto n = make_node(std::move(v), {a.node(), b.node()}, name);
    if (n->requires_grad)
        n->backward = [kind](Node& self) {
            const Matrix& g = self.grad;
            const Matrix& pa = self.parents[0]->value;
            const Matrix& pb = self.parents[1]->value;
            auto ra = pa.rows(), ca = pa.cols();
            auto rb = pb.rows(), cb = pb.cols();
            switch (kind) {
                case BinKind::add:
                    accum(self, 0, reduce_to(g, ra, ca));
                    accum(self, 1, reduce_to(g, rb, cb));
                    break;
                case BinKind::sub:
                    accum(self, 0, reduce_to(g, ra, ca));
                    accum(self, 1, reduce_to(-g, rb, cb));
                    break;
                case BinKind::mul: {
                    Matrix bb = broadcast_to(pb, g.rows(), g.cols());
                    Matrix ab = broadcast_to(pa, g.rows(), g.cols());
                    accum(self, 0, reduce_to(g.cwiseProduct(bb), ra, ca));
                    accum(self, 1, reduce_to(g.cwiseProduct(ab), rb, cb));
                    break;
                }
                case BinKind::divide: {
                    Matrix bb = broadcast_to(pb, g.rows(), g.cols());
                    Matrix gb = g.cwiseQuotient(bb);
                    accum(self, 0, reduce_to(gb, ra, ca));
                    accum(self, 1, reduce_to(-gb.cwiseProduct(self.value), rb, cb));
                    break;
                }
            }
        };
    return Tensor(n);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary(a, b, BinKind::add, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(a, b, BinKind::sub, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(a, b, BinKind::mul, "mul"); }
Tensor div(const Tensor& a, const Tensor& b) { return binary(a, b, BinKind::divide, "div"); }

Tensor scale(const Tensor& a, double s) {
    auto n = make_node(a.value() * s, {a.node()}, "scale");
    if (n->requires_grad)
        n->backward = [s](Node& self) { accum(self, 0, self.grad * s); };
    return Tensor(n);
}

Tensor add_scalar(const Tensor& a, double s) {
    auto n = make_node(a.value().array() + s, {a.node()}, "add_scalar");
    if (n->requires_grad)
        n->backward = [](Node& self) { accum(self, 0, self.grad); };
    return Tensor(n);
}

// ---------------- structural ----------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) throw std::runtime_error("matmul: inner dimensions disagree");
    auto n = make_node(a.value() * b.value(), {a.node(), b.node()}, "matmul");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            const Matrix& g = self.grad;
            accum(self, 0, g * self.parents[1]->value.transpose());
            accum(self, 1, self.parents[0]->value.transpose() * g);
        };
    return Tensor(n);
}

Tensor transpose(const Tensor& a) {
    auto n = make_node(a.value().transpose(), {a.node()}, "transpose");
    if (n->requires_grad)
        n->backward = [](Node& self) { accum(self, 0, self.grad.transpose()); };
    return Tensor(n);
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::runtime_error("concat_cols: empty input");
    Eigen::Index rows = parts[0].rows(), cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows) throw std::runtime_error("concat_cols: row mismatch");
        cols += p.cols();
    }
    Matrix v(rows, cols);
    std::vector<std::shared_ptr<Node>> parents;
    Eigen::Index off = 0;
    for (const auto& p : parts) {
        v.middleCols(off, p.cols()) = p.value();
        off += p.cols();
        parents.push_back(p.node());
    }
    auto n = make_node(std::move(v), std::move(parents), "concat_cols");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            Eigen::Index off = 0;
            for (std::size_t k = 0; k < self.parents.size(); ++k) {
                Eigen::Index w = self.parents[k]->value.cols();
                accum(self, k, self.grad.middleCols(off, w));
                off += w;
            }
        };
    return Tensor(n);
}

Tensor reshape_like(const Tensor& a, int rows, int cols) {
    if (a.rows() * a.cols() != static_cast<Eigen::Index>(rows) * cols)
        throw std::runtime_error("reshape: size mismatch");
    Matrix v = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
    auto n = make_node(std::move(v), {a.node()}, "reshape");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            const Matrix& p = self.parents[0]->value;
            accum(self, 0, Eigen::Map<const Matrix>(self.grad.data(), p.rows(), p.cols()));
        };
    return Tensor(n);
}

// ---------------- unary ----------------

Tensor neg(const Tensor& a) {
    auto n = make_node(-a.value(), {a.node()}, "neg");
    if (n->requires_grad)
        n->backward = [](Node& self) { accum(self, 0, -self.grad); };
    return Tensor(n);
}

Tensor exp(const Tensor& a) {
    auto n = make_node(a.value().array().exp().matrix(), {a.node()}, "exp");
    if (n->requires_grad)
        n->backward = [](Node& self) { accum(self, 0, self.grad.cwiseProduct(self.value)); };
    return Tensor(n);
}

Tensor log(const Tensor& a) {
    auto n = make_node(a.value().array().log().matrix(), {a.node()}, "log");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            accum(self, 0, self.grad.cwiseQuotient(self.parents[0]->value));
        };
    return Tensor(n);
}

Tensor tanh(const Tensor& a) {
    auto n = make_node(a.value().array().tanh().matrix(), {a.node()}, "tanh");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            accum(self, 0,
                  self.grad.cwiseProduct((1.0 - self.value.array().square()).matrix()));
        };
    return Tensor(n);
}

Tensor atanh(const Tensor& a) {
    auto n = make_node(a.value().unaryExpr([](double x) { return std::atanh(x); }), {a.node()},
                       "atanh");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            accum(self, 0,
                  self.grad.cwiseProduct(
                      (1.0 / (1.0 - self.parents[0]->value.array().square())).matrix()));
        };
    return Tensor(n);
}

Tensor atan(const Tensor& a) {
    auto n = make_node(a.value().unaryExpr([](double x) { return std::atan(x); }), {a.node()},
                       "atan");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            accum(self, 0,
                  self.grad.cwiseProduct(
                      (1.0 / (1.0 + self.parents[0]->value.array().square())).matrix()));
        };
    return Tensor(n);
}

Tensor tan(const Tensor& a) {
    auto n = make_node(a.value().unaryExpr([](double x) { return std::tan(x); }), {a.node()},
                       "tan");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            accum(self, 0,
                  self.grad.cwiseProduct((1.0 + self.value.array().square()).matrix()));
        };
    return Tensor(n);
}

Tensor cos(const Tensor& a) {
    auto n = make_node(a.value().array().cos().matrix(), {a.node()}, "cos");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            accum(self, 0,
                  self.grad.cwiseProduct((-self.parents[0]->value.array().sin()).matrix()));
        };
    return Tensor(n);
}

Tensor sin(const Tensor& a) {
    auto n = make_node(a.value().array().sin().matrix(), {a.node()}, "sin");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            accum(self, 0,
                  self.grad.cwiseProduct(self.parents[0]->value.array().cos().matrix()));
        };
    return Tensor(n);
}

Tensor sqrt(const Tensor& a) {
    auto n = make_node(a.value().array().sqrt().matrix(), {a.node()}, "sqrt");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            accum(self, 0, (self.grad.array() * 0.5 / self.value.array().max(1e-300)).matrix());
        };
    return Tensor(n);
}

Tensor abs(const Tensor& a) {
    auto n = make_node(a.value().array().abs().matrix(), {a.node()}, "abs");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            accum(self, 0,
                  self.grad.cwiseProduct(self.parents[0]->value.unaryExpr(
                      [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); })));
        };
    return Tensor(n);
}

Tensor sigmoid(const Tensor& a) {
    auto sig = [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        double e = std::exp(x);
        return e / (1.0 + e);
    };
    auto n = make_node(a.value().unaryExpr(sig), {a.node()}, "sigmoid");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            accum(self, 0,
                  self.grad.cwiseProduct(
                      (self.value.array() * (1.0 - self.value.array())).matrix()));
        };
    return Tensor(n);
}

Tensor softplus(const Tensor& a) {
    auto sp = [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); };
    auto n = make_node(a.value().unaryExpr(sp), {a.node()}, "softplus");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            auto sig = [](double x) {
                if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
                double e = std::exp(x);
                return e / (1.0 + e);
            };
            accum(self, 0, self.grad.cwiseProduct(self.parents[0]->value.unaryExpr(sig)));
        };
    return Tensor(n);
}

Tensor relu(const Tensor& a) {
    auto n = make_node(a.value().cwiseMax(0.0), {a.node()}, "relu");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            accum(self, 0,
                  self.grad.cwiseProduct(self.parents[0]->value.unaryExpr(
                      [](double x) { return x > 0.0 ? 1.0 : 0.0; })));
        };
    return Tensor(n);
}

Tensor square(const Tensor& a) {
    auto n = make_node(a.value().array().square().matrix(), {a.node()}, "square");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            accum(self, 0, 2.0 * self.grad.cwiseProduct(self.parents[0]->value));
        };
    return Tensor(n);
}

Tensor clamp(const Tensor& a, double lo, double hi) {
    auto n = make_node(a.value().cwiseMax(lo).cwiseMin(hi), {a.node()}, "clamp");
    if (n->requires_grad)
        n->backward = [lo, hi](Node& self) {
            accum(self, 0,
                  self.grad.cwiseProduct(self.parents[0]->value.unaryExpr(
                      [lo, hi](double x) { return (x > lo && x < hi) ? 1.0 : 0.0; })));
        };
    return Tensor(n);
}

// ---------------- reductions ----------------

Tensor sum(const Tensor& a) {
    auto n = make_node(Matrix::Constant(1, 1, a.value().sum()), {a.node()}, "sum");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            const Matrix& p = self.parents[0]->value;
            accum(self, 0, Matrix::Constant(p.rows(), p.cols(), self.grad(0, 0)));
        };
    return Tensor(n);
}

Tensor mean(const Tensor& a) {
    double inv = 1.0 / static_cast<double>(a.value().size());
    auto n = make_node(Matrix::Constant(1, 1, a.value().sum() * inv), {a.node()}, "mean");
    if (n->requires_grad)
        n->backward = [inv](Node& self) {
            const Matrix& p = self.parents[0]->value;
            accum(self, 0, Matrix::Constant(p.rows(), p.cols(), self.grad(0, 0) * inv));
        };
    return Tensor(n);
}

Tensor row_sum(const Tensor& a) {
    auto n = make_node(a.value().rowwise().sum(), {a.node()}, "row_sum");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            const Matrix& p = self.parents[0]->value;
            accum(self, 0, self.grad.replicate(1, p.cols()));
        };
    return Tensor(n);
}

Tensor col_sum(const Tensor& a) {
    auto n = make_node(a.value().colwise().sum(), {a.node()}, "col_sum");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            const Matrix& p = self.parents[0]->value;
            accum(self, 0, self.grad.replicate(p.rows(), 1));
        };
    return Tensor(n);
}

Tensor row_norm(const Tensor& a) {
    auto n = make_node(a.value().rowwise().norm(), {a.node()}, "row_norm");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            const Matrix& x = self.parents[0]->value;
            Matrix gx(x.rows(), x.cols());
            for (Eigen::Index r = 0; r < x.rows(); ++r) {
                double nrm = self.value(r, 0);
                if (nrm < 1e-12)
                    gx.row(r).setZero();
                else
                    gx.row(r) = (self.grad(r, 0) / nrm) * x.row(r);
            }
            accum(self, 0, gx);
        };
    return Tensor(n);
}

Tensor row_softmax(const Tensor& a) {
    const Matrix& x = a.value();
    Matrix y(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        double m = x.row(r).maxCoeff();
        Eigen::ArrayXd e = (x.row(r).array() - m).exp();
        y.row(r) = (e / e.sum()).matrix();
    }
    auto n = make_node(std::move(y), {a.node()}, "row_softmax");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            const Matrix& y = self.value;
            const Matrix& g = self.grad;
            Matrix gx(y.rows(), y.cols());
            for (Eigen::Index r = 0; r < y.rows(); ++r) {
                double dot = g.row(r).dot(y.row(r));
                gx.row(r) = (y.row(r).array() * (g.row(r).array() - dot)).matrix();
            }
            accum(self, 0, gx);
        };
    return Tensor(n);
}

// ---------------- fused / indexed ----------------

Tensor gather_pair_diff(const Tensor& u, const std::vector<std::pair<int, int>>& pairs) {
    if (u.cols() != 1) throw std::runtime_error("gather_pair_diff expects a column vector");
    Matrix v(static_cast<Eigen::Index>(pairs.size()), 1);
    for (std::size_t k = 0; k < pairs.size(); ++k)
        v(static_cast<Eigen::Index>(k), 0) = u.value()(pairs[k].first, 0) -
                                             u.value()(pairs[k].second, 0);
    auto n = make_node(std::move(v), {u.node()}, "gather_pair_diff");
    if (n->requires_grad)
        n->backward = [pairs](Node& self) {
            const Matrix& p = self.parents[0]->value;
            Matrix gu = Matrix::Zero(p.rows(), 1);
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                double g = self.grad(static_cast<Eigen::Index>(k), 0);
                gu(pairs[k].first, 0) += g;
                gu(pairs[k].second, 0) -= g;
            }
            accum(self, 0, gu);
        };
    return Tensor(n);
}

Tensor gumbel_sigmoid_sym(const Tensor& pi, const Matrix& noise_logits, double tau) {
    const Matrix& p = pi.value();
    const Eigen::Index n_nodes = p.rows();
    if (p.cols() != n_nodes) throw std::runtime_error("gumbel_sigmoid_sym expects square pi");
    Matrix a = Matrix::Zero(n_nodes, n_nodes);
    auto sig = [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        double e = std::exp(x);
        return e / (1.0 + e);
    };
    for (Eigen::Index i = 0; i < n_nodes; ++i)
        for (Eigen::Index j = i + 1; j < n_nodes; ++j) {
            double logit = std::log(p(i, j) / (1.0 - p(i, j))) + noise_logits(i, j);
            double v = sig(logit / tau);
            a(i, j) = v;
            a(j, i) = v;
        }
    auto n = make_node(std::move(a), {pi.node()}, "gumbel_sigmoid_sym");
    if (n->requires_grad)
        n->backward = [tau](Node& self) {
            const Matrix& p = self.parents[0]->value;
            const Matrix& a = self.value;
            const Matrix& g = self.grad;
            Matrix gp = Matrix::Zero(p.rows(), p.cols());
            for (Eigen::Index i = 0; i < p.rows(); ++i)
                for (Eigen::Index j = i + 1; j < p.cols(); ++j) {
                    double da_dpi =
                        a(i, j) * (1.0 - a(i, j)) / (tau * p(i, j) * (1.0 - p(i, j)));
                    gp(i, j) = (g(i, j) + g(j, i)) * da_dpi;
                }
            accum(self, 0, gp);
        };
    return Tensor(n);
}

Tensor gcn_norm_adj(const Tensor& a) {
    const Matrix& av = a.value();
    const Eigen::Index n_nodes = av.rows();
    Matrix tilde = av + Matrix::Identity(n_nodes, n_nodes);
    Eigen::VectorXd deg = tilde.rowwise().sum();
    Eigen::VectorXd c = deg.array().rsqrt();
    Matrix norm = c.asDiagonal() * tilde * c.asDiagonal();
    auto n = make_node(std::move(norm), {a.node()}, "gcn_norm_adj");
    if (n->requires_grad)
        n->backward = [c](Node& self) {
            const Matrix& av = self.parents[0]->value;
            const Matrix& g = self.grad;
            const Eigen::Index n_nodes = av.rows();
            Matrix tilde = av + Matrix::Identity(n_nodes, n_nodes);
            // Direct term plus the degree chain through c = deg^{-1/2}.
            Matrix ga = c.asDiagonal() * g * c.asDiagonal();
            Eigen::VectorXd dLdc(n_nodes);
            for (Eigen::Index k = 0; k < n_nodes; ++k)
                dLdc(k) = (g.row(k).transpose().array() * c.array() *
                               tilde.row(k).transpose().array()
                           + g.col(k).array() * c.array() * tilde.col(k).array())
                              .sum();
            Eigen::VectorXd v =
                (-0.5) * dLdc.array() * c.array().pow(3.0);
            ga.colwise() += v;
            accum(self, 0, ga);
        };
    return Tensor(n);
}

Tensor infonce_loss(const Tensor& za, const Tensor& zb) {
    if (za.rows() != zb.rows() || za.cols() != zb.cols())
        throw std::runtime_error("infonce: shape mismatch");
    const Eigen::Index n_rows = za.rows();
    Matrix s = za.value() * zb.value().transpose();
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n_rows; ++i) {
        double m = s.row(i).maxCoeff();
        double lse = m + std::log((s.row(i).array() - m).exp().sum());
        loss += lse - s(i, i);
    }
    loss /= static_cast<double>(n_rows);
    auto n = make_node(Matrix::Constant(1, 1, loss), {za.node(), zb.node()}, "infonce");
    if (n->requires_grad)
        n->backward = [](Node& self) {
            const Matrix& za = self.parents[0]->value;
            const Matrix& zb = self.parents[1]->value;
            const Eigen::Index n_rows = za.rows();
            Matrix s = za * zb.transpose();
            for (Eigen::Index i = 0; i < n_rows; ++i) {
                double m = s.row(i).maxCoeff();
                Eigen::ArrayXd e = (s.row(i).array() - m).exp();
                s.row(i) = (e / e.sum()).matrix();  // overwrite with softmax
                s(i, i) -= 1.0;
            }
            double g = self.grad(0, 0) / static_cast<double>(n_rows);
            accum(self, 0, g * (s * zb));
            accum(self, 1, g * (s.transpose() * za));
        };
    return Tensor(n);
}

Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels,
                             const std::vector<int>& rows) {
    if (rows.empty()) throw std::runtime_error("softmax_cross_entropy: no rows selected");
    const Matrix& x = logits.value();
    double loss = 0.0;
    for (int r : rows) {
        double m = x.row(r).maxCoeff();
        double lse = m + std::log((x.row(r).array() - m).exp().sum());
        loss += lse - x(r, labels[r]);
    }
    loss /= static_cast<double>(rows.size());
    auto n = make_node(Matrix::Constant(1, 1, loss), {logits.node()}, "softmax_ce");
    if (n->requires_grad)
        n->backward = [labels, rows](Node& self) {
            const Matrix& x = self.parents[0]->value;
            Matrix gx = Matrix::Zero(x.rows(), x.cols());
            double g = self.grad(0, 0) / static_cast<double>(rows.size());
            for (int r : rows) {
                double m = x.row(r).maxCoeff();
                Eigen::ArrayXd e = (x.row(r).array() - m).exp();
                gx.row(r) = (g * (e / e.sum())).matrix();
                gx(r, labels[r]) -= g;
            }
            accum(self, 0, gx);
        };
    return Tensor(n);
}

GradCheckReport grad_check(const std::function<Tensor()>& build, const std::vector<Tensor>& leaves,
                           double eps, int coords_per_leaf, Rng& rng) {
    GradCheckReport report;
    Tensor out = build();
    backward(out);
    std::vector<Matrix> ad_grads;
    for (const auto& leaf : leaves) {
        ad_grads.push_back(leaf.node()->grad_ready
                               ? leaf.node()->grad
                               : Matrix::Zero(leaf.rows(), leaf.cols()));
    }
    for (std::size_t li = 0; li < leaves.size(); ++li) {
        Matrix& v = leaves[li].node()->value;
        const Eigen::Index size = v.size();
        std::vector<Eigen::Index> coords;
        if (size <= coords_per_leaf) {
            for (Eigen::Index k = 0; k < size; ++k) coords.push_back(k);
        } else {
            for (int k = 0; k < coords_per_leaf; ++k)
                coords.push_back(static_cast<Eigen::Index>(rng.integer(0, size - 1)));
        }
        for (Eigen::Index idx : coords) {
            double old = v.data()[idx];
            v.data()[idx] = old + eps;
            double f1 = build().scalar();
            v.data()[idx] = old - eps;
            double f2 = build().scalar();
            v.data()[idx] = old;
            if (!std::isfinite(f1) || !std::isfinite(f2)) {
                report.all_finite = false;
                continue;
            }
            double fd = (f1 - f2) / (2.0 * eps);
            double adg = ad_grads[li].data()[idx];
            double abs_err = std::abs(adg - fd);
            double rel = abs_err / std::max(std::abs(adg) + std::abs(fd), 1e-2);
            report.max_abs_err = std::max(report.max_abs_err, abs_err);
            report.max_rel_err = std::max(report.max_rel_err, rel);
            ++report.coords_checked;
        }
    }
    return report;
}

}  // namespace ricci::ad
