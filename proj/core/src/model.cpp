#include "iconcl/model.hpp"

#include <cmath>

#include "iconcl/errors.hpp"
#include "iconcl/io.hpp"
#include "iconcl/rng.hpp"

namespace iconcl {

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kSqrt2Inv = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gelu(double u) { return 0.5 * u * (1.0 + std::erf(u * kSqrt2Inv)); }

double gelu_grad(double u) {
    return 0.5 * (1.0 + std::erf(u * kSqrt2Inv)) + u * kInvSqrt2Pi * std::exp(-0.5 * u * u);
}

// Tensor indices inside the registry; must match build_param_store order.
enum GlobalTensor { kWIn = 0, kBIn, kEmbed, kGlobalCount };
enum LayerTensor {
    kLn1G = 0, kLn1B, kWq, kBq, kWk, kBk, kWv, kBv, kWo, kBo,
    kLn2G, kLn2B, kFfW1, kFfB1, kFfW2, kFfB2, kLayerCount
};

int layer_tensor(int layer, LayerTensor t) { return kGlobalCount + layer * kLayerCount + t; }
int lnf_gamma(const ModelConfig& c) { return kGlobalCount + c.layers * kLayerCount; }
int lnf_beta(const ModelConfig& c) { return lnf_gamma(c) + 1; }
int w_out(const ModelConfig& c) { return lnf_gamma(c) + 2; }
int b_out(const ModelConfig& c) { return lnf_gamma(c) + 3; }

int embed_row(const ModelConfig& c, Role role, int pair_index) {
    if (pair_index < 1 || pair_index > c.max_pairs)
        throw ArgumentError("token pair_index " + std::to_string(pair_index) +
                            " outside model capacity I=" + std::to_string(c.max_pairs));
    return static_cast<int>(role) * c.max_pairs + (pair_index - 1);
}

// y = gamma * (x - mean)/std + beta, rowwise; caches xhat and 1/std.
void layernorm_forward(const Eigen::MatrixXd& x, const Eigen::VectorXd& gamma,
                       const Eigen::VectorXd& beta, Eigen::MatrixXd& xhat,
                       Eigen::VectorXd& invstd, Eigen::MatrixXd& y) {
    const auto rows = x.rows();
    const auto cols = x.cols();
    xhat.resize(rows, cols);
    y.resize(rows, cols);
    invstd.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const double mean = x.row(r).mean();
        const double var = (x.row(r).array() - mean).square().mean();
        const double is = 1.0 / std::sqrt(var + kLnEps);
        invstd[r] = is;
        xhat.row(r) = (x.row(r).array() - mean) * is;
        y.row(r) = xhat.row(r).array() * gamma.transpose().array() + beta.transpose().array();
    }
}

// Accumulates dgamma/dbeta, returns dx.
Eigen::MatrixXd layernorm_backward(const Eigen::MatrixXd& dy, const Eigen::MatrixXd& xhat,
                                   const Eigen::VectorXd& invstd, const Eigen::VectorXd& gamma,
                                   Eigen::Map<Eigen::MatrixXd> dgamma,
                                   Eigen::Map<Eigen::MatrixXd> dbeta) {
    const auto rows = dy.rows();
    const auto cols = dy.cols();
    Eigen::MatrixXd dx(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        dgamma.col(0) += (dy.row(r).array() * xhat.row(r).array()).matrix().transpose();
        dbeta.col(0) += dy.row(r).transpose();
        const Eigen::ArrayXd dxhat = dy.row(r).array().transpose() * gamma.array();
        const double m1 = dxhat.mean();
        const double m2 = (dxhat * xhat.row(r).array().transpose()).mean();
        dx.row(r) = (invstd[r] * (dxhat - m1 - xhat.row(r).array().transpose() * m2)).transpose();
    }
    return dx;
}

void masked_softmax(Eigen::MatrixXd& scores, const MaskMatrix& mask) {
    const auto n = scores.rows();
    for (Eigen::Index r = 0; r < n; ++r) {
        double m = -std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < n; ++c)
            if (mask(r, c)) m = std::max(m, scores(r, c));
        double sum = 0.0;
        for (Eigen::Index c = 0; c < n; ++c) {
            if (mask(r, c)) {
                const double e = std::exp(scores(r, c) - m);
                scores(r, c) = e;
                sum += e;
            } else {
                scores(r, c) = 0.0;
            }
        }
        scores.row(r) /= sum;
    }
}

} // namespace

int ParamStore::add(const std::string& name, int rows, int cols) {
    infos_.push_back(TensorInfo{name, rows, cols, total_});
    total_ += static_cast<long>(rows) * cols;
    return static_cast<int>(infos_.size()) - 1;
}

void ParamStore::finalize() { flat = Eigen::VectorXd::Zero(total_); }

Eigen::Map<Eigen::MatrixXd> ParamStore::mat(int idx) {
    const auto& t = infos_[static_cast<std::size_t>(idx)];
    return {flat.data() + t.offset, t.rows, t.cols};
}

Eigen::Map<const Eigen::MatrixXd> ParamStore::mat(int idx) const {
    const auto& t = infos_[static_cast<std::size_t>(idx)];
    return {flat.data() + t.offset, t.rows, t.cols};
}

ParamStore build_param_store(const ModelConfig& c) {
    if (c.layers < 1 || c.heads < 1 || c.d_model < 1 || c.d_attn < 1 || c.d_ff < 1 ||
        c.max_pairs < 2)
        throw ConfigError("model config: dimensions must be positive, max_pairs >= 2");
    if (c.d_attn % c.heads != 0) throw ConfigError("model config: heads must divide d_attn");
    if (c.grid_n % c.token_stride != 0)
        throw ConfigError("model config: token_stride must divide grid_n");

    ParamStore s;
    s.add("w_in", c.d_model, 5);
    s.add("b_in", c.d_model, 1);
    s.add("embed", 3 * c.max_pairs, c.d_model);
    for (int l = 0; l < c.layers; ++l) {
        const std::string p = "layers." + std::to_string(l) + ".";
        s.add(p + "ln1.gamma", c.d_model, 1);
        s.add(p + "ln1.beta", c.d_model, 1);
        s.add(p + "attn.wq", c.d_attn, c.d_model);
        s.add(p + "attn.bq", c.d_attn, 1);
        s.add(p + "attn.wk", c.d_attn, c.d_model);
        s.add(p + "attn.bk", c.d_attn, 1);
        s.add(p + "attn.wv", c.d_attn, c.d_model);
        s.add(p + "attn.bv", c.d_attn, 1);
        s.add(p + "attn.wo", c.d_model, c.d_attn);
        s.add(p + "attn.bo", c.d_model, 1);
        s.add(p + "ln2.gamma", c.d_model, 1);
        s.add(p + "ln2.beta", c.d_model, 1);
        s.add(p + "ff.w1", c.d_ff, c.d_model);
        s.add(p + "ff.b1", c.d_ff, 1);
        s.add(p + "ff.w2", c.d_model, c.d_ff);
        s.add(p + "ff.b2", c.d_model, 1);
    }
    s.add("ln_f.gamma", c.d_model, 1);
    s.add("ln_f.beta", c.d_model, 1);
    s.add("w_out", 1, c.d_model);
    s.add("b_out", 1, 1);
    s.finalize();
    return s;
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
    ModelParams p{config, build_param_store(config)};
    Rng rng(derive_seed(seed, 0x1811));
    for (std::size_t i = 0; i < p.store.tensors().size(); ++i) {
        const auto& info = p.store.tensors()[i];
        auto m = p.store.mat(static_cast<int>(i));
        const bool is_gamma = info.name.ends_with("gamma");
        const bool is_bias = info.cols == 1 && !is_gamma;
        if (is_gamma) {
            m.setOnes();
        } else if (is_bias) {
            m.setZero();
        } else {
            const double scale =
                info.name == "embed" ? 1.0 / std::sqrt(static_cast<double>(config.d_model))
                                     : 1.0 / std::sqrt(static_cast<double>(info.cols));
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = scale * rng.normal();
        }
    }
    return p;
}

MaskMatrix attention_mask(const std::vector<Block>& blocks, int seq_len) {
    MaskMatrix mask = MaskMatrix::Zero(seq_len, seq_len);
    for (const auto& tb : blocks) {
        for (const auto& sb : blocks) {
            bool visible = false;
            if (sb.role != Role::Query) {
                if (sb.pair_index < tb.pair_index)
                    visible = true; // C_j, Q_j with j < i
                else if (sb.pair_index == tb.pair_index) {
                    if (sb.role == Role::Condition)
                        visible = true; // own condition block
                    else if (sb.role == Role::QoI && tb.role == Role::QoI)
                        visible = true; // Q_i sees Q_i
                }
            }
            if (!visible) continue;
            for (int t = tb.start; t < tb.start + tb.length; ++t)
                for (int s = sb.start; s < sb.start + sb.length; ++s)
                    mask(t, s) = 1;
        }
        if (tb.role == Role::Query)
            for (int t = tb.start; t < tb.start + tb.length; ++t) mask(t, t) = 1;
    }
    return mask;
}

Predictions forward_cached(const ModelParams& params, const PromptSequence& prompt,
                           ModelWorkspace& ws) {
    const ModelConfig& c = params.config;
    const ParamStore& ps = params.store;
    const int seq = prompt.seq_len();
    if (seq == 0) throw ArgumentError("forward: empty prompt");
    const int hd = c.head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

    ws.x0.resize(seq, 5);
    ws.embed_rows.resize(static_cast<std::size_t>(seq));
    for (int t = 0; t < seq; ++t) {
        const Token& tok = prompt.tokens[static_cast<std::size_t>(t)];
        if (!std::isfinite(tok.key) || !std::isfinite(tok.value))
            throw NumericError("forward: non-finite token at position " + std::to_string(t));
        ws.x0(t, 0) = tok.key;
        ws.x0(t, 1) = tok.value;
        ws.x0(t, 2) = tok.role == Role::Condition ? 1.0 : 0.0;
        ws.x0(t, 3) = tok.role == Role::QoI ? 1.0 : 0.0;
        ws.x0(t, 4) = tok.role == Role::Query ? 1.0 : 0.0;
        ws.embed_rows[static_cast<std::size_t>(t)] = embed_row(c, tok.role, tok.pair_index);
    }
    ws.mask = attention_mask(prompt.blocks, seq);

    Eigen::MatrixXd x = ws.x0 * ps.mat(kWIn).transpose();
    x.rowwise() += ps.mat(kBIn).col(0).transpose();
    const auto embed = ps.mat(kEmbed);
    for (int t = 0; t < seq; ++t) x.row(t) += embed.row(ws.embed_rows[static_cast<std::size_t>(t)]);

    ws.layers.resize(static_cast<std::size_t>(c.layers));
    Eigen::MatrixXd y, attn_out, ff_out;
    for (int l = 0; l < c.layers; ++l) {
        LayerCache& lc = ws.layers[static_cast<std::size_t>(l)];
        lc.x_in = x;

        layernorm_forward(lc.x_in, ps.mat(layer_tensor(l, kLn1G)).col(0),
                          ps.mat(layer_tensor(l, kLn1B)).col(0), lc.ln1_xhat, lc.ln1_invstd, y);

        lc.q = y * ps.mat(layer_tensor(l, kWq)).transpose();
        lc.q.rowwise() += ps.mat(layer_tensor(l, kBq)).col(0).transpose();
        lc.k = y * ps.mat(layer_tensor(l, kWk)).transpose();
        lc.k.rowwise() += ps.mat(layer_tensor(l, kBk)).col(0).transpose();
        lc.v = y * ps.mat(layer_tensor(l, kWv)).transpose();
        lc.v.rowwise() += ps.mat(layer_tensor(l, kBv)).col(0).transpose();

        lc.attn_cat.resize(seq, c.d_attn);
        lc.probs.resize(static_cast<std::size_t>(c.heads));
        for (int h = 0; h < c.heads; ++h) {
            auto qh = lc.q.middleCols(h * hd, hd);
            auto kh = lc.k.middleCols(h * hd, hd);
            auto vh = lc.v.middleCols(h * hd, hd);
            Eigen::MatrixXd& p = lc.probs[static_cast<std::size_t>(h)];
            p.noalias() = qh * kh.transpose();
            p *= scale;
            masked_softmax(p, ws.mask);
            lc.attn_cat.middleCols(h * hd, hd).noalias() = p * vh;
        }
        attn_out.noalias() = lc.attn_cat * ps.mat(layer_tensor(l, kWo)).transpose();
        attn_out.rowwise() += ps.mat(layer_tensor(l, kBo)).col(0).transpose();
        lc.x_mid = lc.x_in + attn_out;

        layernorm_forward(lc.x_mid, ps.mat(layer_tensor(l, kLn2G)).col(0),
                          ps.mat(layer_tensor(l, kLn2B)).col(0), lc.ln2_xhat, lc.ln2_invstd, y);
        lc.ff_pre.noalias() = y * ps.mat(layer_tensor(l, kFfW1)).transpose();
        lc.ff_pre.rowwise() += ps.mat(layer_tensor(l, kFfB1)).col(0).transpose();
        lc.ff_act = lc.ff_pre.unaryExpr([](double u) { return gelu(u); });
        ff_out.noalias() = lc.ff_act * ps.mat(layer_tensor(l, kFfW2)).transpose();
        ff_out.rowwise() += ps.mat(layer_tensor(l, kFfB2)).col(0).transpose();
        x = lc.x_mid + ff_out;
    }

    ws.x_last = x;
    layernorm_forward(ws.x_last, ps.mat(lnf_gamma(c)).col(0), ps.mat(lnf_beta(c)).col(0),
                      ws.lnf_xhat, ws.lnf_invstd, y);
    ws.out = y * ps.mat(w_out(c)).row(0).transpose();
    ws.out.array() += ps.mat(b_out(c))(0, 0);

    Predictions pred;
    ws.query_blocks.clear();
    for (const auto& blk : prompt.blocks) {
        if (blk.role != Role::Query) continue;
        ws.query_blocks.push_back(blk);
        pred.values.push_back(ws.out.segment(blk.start, blk.length));
        pred.pair_index.push_back(blk.pair_index);
    }
    for (const auto& v : pred.values)
        if (!v.allFinite()) throw NumericError("forward: non-finite prediction");
    return pred;
}

Predictions forward(const ModelParams& params, const PromptSequence& prompt) {
    ModelWorkspace ws;
    return forward_cached(params, prompt, ws);
}

Eigen::VectorXd backward(const ModelParams& params, const ModelWorkspace& ws,
                         const std::vector<Eigen::VectorXd>& dvalues, Eigen::VectorXd& grad) {
    const ModelConfig& c = params.config;
    const ParamStore& ps = params.store;
    const int seq = static_cast<int>(ws.x0.rows());
    const int hd = c.head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
    if (grad.size() != ps.size()) throw ArgumentError("backward: gradient buffer size mismatch");
    if (dvalues.size() != ws.query_blocks.size())
        throw ArgumentError("backward: expected one gradient per query block");

    // Gradient tensors live in `grad`, addressed through the params registry.
    auto gmat = [&](int idx) {
        const auto& t = ps.tensors()[static_cast<std::size_t>(idx)];
        return Eigen::Map<Eigen::MatrixXd>(grad.data() + t.offset, t.rows, t.cols);
    };

    Eigen::VectorXd dout = Eigen::VectorXd::Zero(seq);
    for (std::size_t b = 0; b < ws.query_blocks.size(); ++b) {
        const Block& blk = ws.query_blocks[b];
        if (dvalues[b].size() != blk.length)
            throw ArgumentError("backward: gradient length mismatch for query block");
        dout.segment(blk.start, blk.length) = dvalues[b];
    }

    // Output head; recompute the final layernorm output.
    Eigen::MatrixXd yf(seq, c.d_model);
    for (int r = 0; r < seq; ++r)
        yf.row(r) = ws.lnf_xhat.row(r).array() * ps.mat(lnf_gamma(c)).col(0).transpose().array() +
                    ps.mat(lnf_beta(c)).col(0).transpose().array();
    gmat(w_out(c)).row(0) += dout.transpose() * yf;
    gmat(b_out(c))(0, 0) += dout.sum();
    Eigen::MatrixXd dy = dout * ps.mat(w_out(c)).row(0);
    Eigen::MatrixXd dx = layernorm_backward(dy, ws.lnf_xhat, ws.lnf_invstd,
                                            ps.mat(lnf_gamma(c)).col(0), gmat(lnf_gamma(c)),
                                            gmat(lnf_beta(c)));

    Eigen::MatrixXd dq, dk, dv, dyln;
    for (int l = c.layers - 1; l >= 0; --l) {
        const LayerCache& lc = ws.layers[static_cast<std::size_t>(l)];

        // Feed-forward half: x_next = x_mid + W2 gelu(W1 ln2(x_mid) + b1) + b2.
        Eigen::MatrixXd dff_act = dx * ps.mat(layer_tensor(l, kFfW2));
        Eigen::MatrixXd y2(seq, c.d_model);
        for (int r = 0; r < seq; ++r)
            y2.row(r) =
                lc.ln2_xhat.row(r).array() *
                    ps.mat(layer_tensor(l, kLn2G)).col(0).transpose().array() +
                ps.mat(layer_tensor(l, kLn2B)).col(0).transpose().array();
        gmat(layer_tensor(l, kFfW2)) += dx.transpose() * lc.ff_act;
        gmat(layer_tensor(l, kFfB2)).col(0) += dx.colwise().sum().transpose();
        Eigen::MatrixXd dff_pre =
            dff_act.array() * lc.ff_pre.unaryExpr([](double u) { return gelu_grad(u); }).array();
        gmat(layer_tensor(l, kFfW1)) += dff_pre.transpose() * y2;
        gmat(layer_tensor(l, kFfB1)).col(0) += dff_pre.colwise().sum().transpose();
        dyln = dff_pre * ps.mat(layer_tensor(l, kFfW1));
        Eigen::MatrixXd dx_mid =
            dx + layernorm_backward(dyln, lc.ln2_xhat, lc.ln2_invstd,
                                    ps.mat(layer_tensor(l, kLn2G)).col(0),
                                    gmat(layer_tensor(l, kLn2G)), gmat(layer_tensor(l, kLn2B)));

        // Attention half: x_mid = x_in + Wo attn(ln1(x_in)) + bo.
        Eigen::MatrixXd y1(seq, c.d_model);
        for (int r = 0; r < seq; ++r)
            y1.row(r) =
                lc.ln1_xhat.row(r).array() *
                    ps.mat(layer_tensor(l, kLn1G)).col(0).transpose().array() +
                ps.mat(layer_tensor(l, kLn1B)).col(0).transpose().array();
        gmat(layer_tensor(l, kWo)) += dx_mid.transpose() * lc.attn_cat;
        gmat(layer_tensor(l, kBo)).col(0) += dx_mid.colwise().sum().transpose();
        Eigen::MatrixXd dattn_cat = dx_mid * ps.mat(layer_tensor(l, kWo));

        dq.setZero(seq, c.d_attn);
        dk.setZero(seq, c.d_attn);
        dv.setZero(seq, c.d_attn);
        for (int h = 0; h < c.heads; ++h) {
            const Eigen::MatrixXd& p = lc.probs[static_cast<std::size_t>(h)];
            auto dh = dattn_cat.middleCols(h * hd, hd);
            auto vh = lc.v.middleCols(h * hd, hd);
            Eigen::MatrixXd dp = dh * vh.transpose();
            dv.middleCols(h * hd, hd).noalias() = p.transpose() * dh;
            // Softmax backward, row-wise.
            const Eigen::VectorXd rowdot = dp.cwiseProduct(p).rowwise().sum();
            dp.colwise() -= rowdot;
            Eigen::MatrixXd ds = p.cwiseProduct(dp);
            ds *= scale;
            dq.middleCols(h * hd, hd).noalias() = ds * lc.k.middleCols(h * hd, hd);
            dk.middleCols(h * hd, hd).noalias() = ds.transpose() * lc.q.middleCols(h * hd, hd);
        }

        gmat(layer_tensor(l, kWq)) += dq.transpose() * y1;
        gmat(layer_tensor(l, kBq)).col(0) += dq.colwise().sum().transpose();
        gmat(layer_tensor(l, kWk)) += dk.transpose() * y1;
        gmat(layer_tensor(l, kBk)).col(0) += dk.colwise().sum().transpose();
        gmat(layer_tensor(l, kWv)) += dv.transpose() * y1;
        gmat(layer_tensor(l, kBv)).col(0) += dv.colwise().sum().transpose();

        dyln = dq * ps.mat(layer_tensor(l, kWq)) + dk * ps.mat(layer_tensor(l, kWk)) +
               dv * ps.mat(layer_tensor(l, kWv));
        dx = dx_mid + layernorm_backward(dyln, lc.ln1_xhat, lc.ln1_invstd,
                                         ps.mat(layer_tensor(l, kLn1G)).col(0),
                                         gmat(layer_tensor(l, kLn1G)), gmat(layer_tensor(l, kLn1B)));
    }

    // Embedding layer.
    gmat(kWIn) += dx.transpose() * ws.x0;
    gmat(kBIn).col(0) += dx.colwise().sum().transpose();
    auto dembed = gmat(kEmbed);
    for (int t = 0; t < seq; ++t)
        dembed.row(ws.embed_rows[static_cast<std::size_t>(t)]) += dx.row(t);
    Eigen::MatrixXd dx0 = dx * ps.mat(kWIn);
    return dx0.col(1); // gradient w.r.t. token values
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& dir, long step) {
    std::filesystem::create_directories(dir);
    const ModelConfig& c = params.config;
    nlohmann::json tensors = nlohmann::json::array();
    for (const auto& t : params.store.tensors())
        tensors.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
    nlohmann::json manifest{
        {"format", "iconcl-checkpoint-v1"},
        {"step", step},
        {"config",
         {{"layers", c.layers},
          {"heads", c.heads},
          {"d_model", c.d_model},
          {"d_attn", c.d_attn},
          {"d_ff", c.d_ff},
          {"max_pairs", c.max_pairs},
          {"token_stride", c.token_stride},
          {"grid_n", c.grid_n}}},
        {"tensors", tensors},
    };
    write_json(dir / "manifest.json", manifest);

    std::vector<float> buf(static_cast<std::size_t>(params.store.size()));
    for (long i = 0; i < params.store.size(); ++i)
        buf[static_cast<std::size_t>(i)] = static_cast<float>(params.store.flat[i]);
    write_f32(dir / "params.f32", buf);
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
    const nlohmann::json manifest = read_json(dir / "manifest.json");
    if (manifest.value("format", "") != "iconcl-checkpoint-v1")
        throw IoError(dir.string() + ": not an iconcl checkpoint");
    const auto& jc = manifest.at("config");
    ModelConfig c;
    c.layers = jc.at("layers").get<int>();
    c.heads = jc.at("heads").get<int>();
    c.d_model = jc.at("d_model").get<int>();
    c.d_attn = jc.at("d_attn").get<int>();
    c.d_ff = jc.at("d_ff").get<int>();
    c.max_pairs = jc.at("max_pairs").get<int>();
    c.token_stride = jc.at("token_stride").get<int>();
    c.grid_n = jc.at("grid_n").get<int>();

    Checkpoint ck{ModelParams{c, build_param_store(c)}, manifest.at("step").get<long>()};
    const auto& infos = ck.params.store.tensors();
    const auto& jt = manifest.at("tensors");
    if (jt.size() != infos.size()) throw IoError(dir.string() + ": tensor table mismatch");
    for (std::size_t i = 0; i < infos.size(); ++i) {
        if (jt[i].at("name") != infos[i].name || jt[i].at("rows") != infos[i].rows ||
            jt[i].at("cols") != infos[i].cols)
            throw IoError(dir.string() + ": tensor " + infos[i].name + " mismatch");
    }
    const auto buf = read_f32(dir / "params.f32", static_cast<std::size_t>(ck.params.store.size()));
    for (long i = 0; i < ck.params.store.size(); ++i)
        ck.params.store.flat[i] = static_cast<double>(buf[static_cast<std::size_t>(i)]);
    return ck;
}

} // namespace iconcl
