#include "dcbia/nnet.hpp"

#include <cmath>
#include <cstdlib>
#include <ios>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dcbia::nnet {

namespace {

Gradients zeros_like(const MlpNetwork& net)
{
    Gradients g(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        g[l].weights = Eigen::MatrixXd::Zero(net.layers[l].weights.rows(), net.layers[l].weights.cols());
        g[l].bias = Eigen::VectorXd::Zero(net.layers[l].bias.size());
    }
    return g;
}

void check_input(const MlpNetwork& net, Eigen::Index rows)
{
    if (rows != net.input_size())
        throw std::invalid_argument("nnet: input has " + std::to_string(rows) + " rows, network expects " +
                                    std::to_string(net.input_size()));
}

} // namespace

bool MlpNetwork::all_finite() const
{
    for (const auto& l : layers)
        if (!l.weights.allFinite() || !l.bias.allFinite())
            return false;
    return true;
}

MlpNetwork init_network(const std::vector<int>& layer_sizes, Rng& rng)
{
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("init_network: need at least input and output layers");
    for (int s : layer_sizes)
        if (s < 1)
            throw std::invalid_argument("init_network: layer sizes must be >= 1");

    MlpNetwork net;
    net.layer_sizes = layer_sizes;
    const std::size_t n = layer_sizes.size() - 1;
    net.layers.resize(n);
    for (std::size_t l = 0; l < n; ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const bool output = l + 1 == n;
        const double limit = output ? std::sqrt(6.0 / (fan_in + fan_out)) : std::sqrt(6.0 / fan_in);
        std::uniform_real_distribution<double> u(-limit, limit);
        auto& layer = net.layers[l];
        layer.weights.resize(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c)
                layer.weights(r, c) = u(rng);
        layer.bias = Eigen::VectorXd::Zero(fan_out);
    }
    return net;
}

AdamState init_adam(const MlpNetwork& net, double learning_rate, double beta1, double beta2, double epsilon)
{
    AdamState s;
    s.first_moment = zeros_like(net);
    s.second_moment = zeros_like(net);
    s.learning_rate = learning_rate;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.epsilon = epsilon;
    return s;
}

Eigen::MatrixXd forward_batch(const MlpNetwork& net, const Eigen::MatrixXd& x)
{
    check_input(net, x.rows());
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        Eigen::MatrixXd z = layer.weights * a;
        z.colwise() += layer.bias;
        if (l + 1 < net.layers.size())
            z = z.cwiseMax(0.0);
        a = std::move(z);
    }
    return a;
}

Eigen::VectorXd forward(const MlpNetwork& net, const Eigen::VectorXd& x)
{
    return forward_batch(net, x);
}

LossAndGradients loss_and_gradients(const MlpNetwork& net, const TrainBatch& batch)
{
    const auto B = static_cast<Eigen::Index>(batch.size());
    if (B == 0)
        throw std::invalid_argument("loss_and_gradients: empty batch");
    if (batch.contexts.cols() != B || batch.targets.size() != batch.actions.size())
        throw std::invalid_argument("loss_and_gradients: batch fields have mismatched lengths");
    check_input(net, batch.contexts.rows());

    const std::size_t n = net.layers.size();
    // activations[0] is the input; pre[l] holds W_l a_l + b_l
    std::vector<Eigen::MatrixXd> activations(n + 1);
    std::vector<Eigen::MatrixXd> pre(n);
    activations[0] = batch.contexts;
    for (std::size_t l = 0; l < n; ++l) {
        pre[l] = net.layers[l].weights * activations[l];
        pre[l].colwise() += net.layers[l].bias;
        activations[l + 1] = l + 1 < n ? pre[l].cwiseMax(0.0) : pre[l];
    }

    const Eigen::MatrixXd& out = activations[n];
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(out.rows(), B);
    LossAndGradients res;
    for (Eigen::Index i = 0; i < B; ++i) {
        const int a = batch.actions[static_cast<std::size_t>(i)];
        if (a < 0 || a >= out.rows())
            throw std::invalid_argument("loss_and_gradients: action out of range");
        const double err = out(a, i) - batch.targets[static_cast<std::size_t>(i)];
        res.loss += err * err;
        delta(a, i) = 2.0 * err / static_cast<double>(B);
    }
    res.loss /= static_cast<double>(B);

    res.gradients.resize(n);
    for (std::size_t l = n; l-- > 0;) {
        res.gradients[l].weights = delta * activations[l].transpose();
        res.gradients[l].bias = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = net.layers[l].weights.transpose() * delta;
            delta = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return res;
}

void adam_step(MlpNetwork& net, AdamState& adam, const Gradients& gradients)
{
    if (gradients.size() != net.layers.size() || adam.first_moment.size() != net.layers.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    ++adam.step;
    const double b1 = adam.beta1;
    const double b2 = adam.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(adam.step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(adam.step));
    const double lr = adam.learning_rate;
    const double eps = adam.epsilon;

    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        update(net.layers[l].weights, adam.first_moment[l].weights, adam.second_moment[l].weights,
               gradients[l].weights);
        update(net.layers[l].bias, adam.first_moment[l].bias, adam.second_moment[l].bias, gradients[l].bias);
    }
}

// ---------------------------------------------------------------------------
// Checkpoint I/O

namespace {

constexpr const char* kMagic = "dcbia-mlp";
constexpr int kVersion = 1;

void write_values(std::ostream& out, const double* data, Eigen::Index count)
{
    for (Eigen::Index i = 0; i < count; ++i)
        out << (i ? " " : "") << data[i];
    out << '\n';
}

template <typename Derived>
void write_matrix(std::ostream& out, const char* tag, const Eigen::MatrixBase<Derived>& m)
{
    out << tag << ' ' << m.rows() << ' ' << m.cols() << '\n';
    // row-major order
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
    write_values(out, rm.data(), rm.size());
}

std::string next_token(std::istream& in)
{
    std::string tok;
    if (!(in >> tok))
        throw std::runtime_error("checkpoint: unexpected end of input");
    return tok;
}

void expect(std::istream& in, const std::string& word)
{
    auto tok = next_token(in);
    if (tok != word)
        throw std::runtime_error("checkpoint: expected '" + word + "', found '" + tok + "'");
}

long long read_int(std::istream& in)
{
    auto tok = next_token(in);
    char* end = nullptr;
    long long v = std::strtoll(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
        throw std::runtime_error("checkpoint: bad integer '" + tok + "'");
    return v;
}

double read_double(std::istream& in)
{
    // strtod handles hex floats; libstdc++ operator>> does not.
    auto tok = next_token(in);
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw std::runtime_error("checkpoint: bad number '" + tok + "'");
    return v;
}

Eigen::MatrixXd read_matrix(std::istream& in, const std::string& tag, Eigen::Index rows, Eigen::Index cols)
{
    expect(in, tag);
    if (read_int(in) != rows || read_int(in) != cols)
        throw std::runtime_error("checkpoint: '" + tag + "' has unexpected shape");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = read_double(in);
    return m;
}

} // namespace

void write_checkpoint(std::ostream& out, const MlpNetwork& net, const AdamState& adam)
{
    const auto flags = out.flags();
    out << std::hexfloat;
    out << kMagic << ' ' << kVersion << '\n';
    out << "layers " << net.layer_sizes.size();
    for (int s : net.layer_sizes)
        out << ' ' << s;
    out << '\n';
    for (const auto& l : net.layers) {
        write_matrix(out, "weights", l.weights);
        write_matrix(out, "bias", l.bias);
    }
    out << "adam " << adam.step << ' ' << adam.learning_rate << ' ' << adam.beta1 << ' ' << adam.beta2 << ' '
        << adam.epsilon << '\n';
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        write_matrix(out, "m_weights", adam.first_moment[l].weights);
        write_matrix(out, "m_bias", adam.first_moment[l].bias);
        write_matrix(out, "v_weights", adam.second_moment[l].weights);
        write_matrix(out, "v_bias", adam.second_moment[l].bias);
    }
    out << "end\n";
    out.flags(flags);
}

void read_checkpoint(std::istream& in, MlpNetwork& net, AdamState& adam)
{
    expect(in, kMagic);
    if (read_int(in) != kVersion)
        throw std::runtime_error("checkpoint: unsupported version");
    expect(in, "layers");
    const auto count = read_int(in);
    if (count < 2 || count > 1024)
        throw std::runtime_error("checkpoint: bad layer count");
    MlpNetwork n;
    for (long long i = 0; i < count; ++i) {
        const auto s = read_int(in);
        if (s < 1)
            throw std::runtime_error("checkpoint: bad layer size");
        n.layer_sizes.push_back(static_cast<int>(s));
    }
    n.layers.resize(n.layer_sizes.size() - 1);
    for (std::size_t l = 0; l < n.layers.size(); ++l) {
        n.layers[l].weights = read_matrix(in, "weights", n.layer_sizes[l + 1], n.layer_sizes[l]);
        n.layers[l].bias = read_matrix(in, "bias", n.layer_sizes[l + 1], 1);
    }
    AdamState a = init_adam(n);
    expect(in, "adam");
    a.step = read_int(in);
    a.learning_rate = read_double(in);
    a.beta1 = read_double(in);
    a.beta2 = read_double(in);
    a.epsilon = read_double(in);
    for (std::size_t l = 0; l < n.layers.size(); ++l) {
        const auto r = n.layer_sizes[l + 1];
        const auto c = n.layer_sizes[l];
        a.first_moment[l].weights = read_matrix(in, "m_weights", r, c);
        a.first_moment[l].bias = read_matrix(in, "m_bias", r, 1);
        a.second_moment[l].weights = read_matrix(in, "v_weights", r, c);
        a.second_moment[l].bias = read_matrix(in, "v_bias", r, 1);
    }
    expect(in, "end");
    net = std::move(n);
    adam = std::move(a);
}

} // namespace dcbia::nnet
