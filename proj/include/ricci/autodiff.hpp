#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ricci/rng.hpp"

// Reverse-mode differentiation over dense matrices. A Tensor is a handle to a
// node of the computation record; building an expression records parents and
// a pull-style backward closure. Graphs are rebuilt every step; leaves
// (parameters) persist across steps and their grads are reset by backward().
namespace ricci::ad {

using Matrix = Eigen::MatrixXd;

struct Node {
    Matrix value;
    Matrix grad;  // allocated lazily during backward
    bool requires_grad = false;
    bool grad_ready = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward;
    const char* op = "leaf";

    void ensure_grad() {
        if (!grad_ready) {
            grad = Matrix::Zero(value.rows(), value.cols());
            grad_ready = true;
        }
    }
};

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

    static Tensor constant(Matrix v);
    static Tensor constant(double v);
    static Tensor param(Matrix v);

    bool defined() const { return node_ != nullptr; }
    const Matrix& value() const { return node_->value; }
    Matrix& mutable_value() { return node_->value; }
    const Matrix& grad() const { return node_->grad; }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    double scalar() const { return node_->value(0, 0); }
    Eigen::Index rows() const { return node_->value.rows(); }
    Eigen::Index cols() const { return node_->value.cols(); }

    std::shared_ptr<Node> node() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

// Runs reverse-mode accumulation from a 1x1 tensor. Grads of every reachable
// node (leaves included) are zeroed first, then accumulated.
void backward(const Tensor& out);

// ---- elementwise binary (same shape, or one side 1x1 / 1xC / Rx1 broadcast) ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

// ---- scalar convenience ----
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);

// ---- structural ----
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor reshape_like(const Tensor& a, int rows, int cols);

// ---- elementwise unary ----
Tensor neg(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor atanh(const Tensor& a);
Tensor atan(const Tensor& a);
Tensor tan(const Tensor& a);
Tensor cos(const Tensor& a);
Tensor sin(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor abs(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor square(const Tensor& a);
Tensor clamp(const Tensor& a, double lo, double hi);

// ---- reductions ----
Tensor sum(const Tensor& a);       // 1x1
Tensor mean(const Tensor& a);      // 1x1
Tensor row_sum(const Tensor& a);   // Rx1
Tensor col_sum(const Tensor& a);   // 1xC
Tensor row_norm(const Tensor& a);  // Rx1, L2 norms

Tensor row_softmax(const Tensor& a);

// y_k = u(i_k) - u(j_k) for a column vector u.
Tensor gather_pair_diff(const Tensor& u, const std::vector<std::pair<int, int>>& pairs);

// Symmetric concrete relaxation: for i<j, sigmoid((logit(pi_ij) + noise_ij)/tau)
// mirrored to (j,i); zero diagonal. noise holds pre-sampled logistic logits.
Tensor gumbel_sigmoid_sym(const Tensor& pi, const Matrix& noise_logits, double tau);

// D^{-1/2} (A + I) D^{-1/2} with D the self-looped degree diagonal.
Tensor gcn_norm_adj(const Tensor& a);

// Mean over rows of (logsumexp_j <za_i, zb_j> - <za_i, zb_i>).
Tensor infonce_loss(const Tensor& za, const Tensor& zb);

// Mean cross-entropy of row-softmaxed logits at the given rows.
Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels,
                             const std::vector<int>& rows);

// operators
inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& a) { return neg(a); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }
inline Tensor operator*(const Tensor& a, double s) { return scale(a, s); }
inline Tensor operator+(const Tensor& a, double s) { return add_scalar(a, s); }
inline Tensor operator+(double s, const Tensor& a) { return add_scalar(a, s); }
inline Tensor operator-(const Tensor& a, double s) { return add_scalar(a, -s); }
inline Tensor operator-(double s, const Tensor& a) { return add_scalar(neg(a), s); }

struct GradCheckReport {
    double max_rel_err = 0.0;
    double max_abs_err = 0.0;
    int coords_checked = 0;
    bool all_finite = true;
    bool pass(double tol = 1e-4) const { return all_finite && max_rel_err <= tol; }
};

// Compares reverse-mode gradients of build() (re-evaluated from current leaf
// values) against central differences on up to coords_per_leaf randomly chosen
// coordinates of each leaf.
GradCheckReport grad_check(const std::function<Tensor()>& build, const std::vector<Tensor>& leaves,
                           double eps, int coords_per_leaf, Rng& rng);

}  // namespace ricci::ad
