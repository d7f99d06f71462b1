#include "iconcl/prompt.hpp"

#include <string>

#include "iconcl/errors.hpp"

namespace iconcl {

namespace {

void require_token_stride(const GridFunction& g, int token_stride) {
    if (token_stride < 1 || g.n() % token_stride != 0)
        throw ArgumentError("token stride " + std::to_string(token_stride) +
                            " must divide grid size " + std::to_string(g.n()));
}

void require_compatible(const GridFunction& a, const GridFunction& b) {
    if (a.n() != b.n() || a.dx != b.dx)
        throw ArgumentError("prompt functions disagree on grid shape");
}

void append_function_block(PromptSequence& seq, const GridFunction& g, Role role,
                           int pair_index, int token_stride) {
    Block blk{role, pair_index, seq.seq_len(), g.n() / token_stride};
    for (int i = 0; i < g.n(); i += token_stride)
        seq.tokens.push_back(Token{g.key(i), g.values[static_cast<std::size_t>(i)], role, pair_index});
    seq.blocks.push_back(blk);
}

void append_query_block(PromptSequence& seq, const std::vector<double>& keys, int pair_index) {
    Block blk{Role::Query, pair_index, seq.seq_len(), static_cast<int>(keys.size())};
    for (double k : keys) seq.tokens.push_back(Token{k, 0.0, Role::Query, pair_index});
    seq.blocks.push_back(blk);
}

} // namespace

std::vector<double> token_keys(const GridFunction& g, int token_stride) {
    require_token_stride(g, token_stride);
    std::vector<double> keys;
    keys.reserve(static_cast<std::size_t>(g.n() / token_stride));
    for (int i = 0; i < g.n(); i += token_stride) keys.push_back(g.key(i));
    return keys;
}

std::vector<double> token_values(const GridFunction& g, int token_stride) {
    require_token_stride(g, token_stride);
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(g.n() / token_stride));
    for (int i = 0; i < g.n(); i += token_stride)
        vals.push_back(g.values[static_cast<std::size_t>(i)]);
    return vals;
}

PromptSequence build_prompt(const std::vector<CondQoIPair>& examples,
                            const GridFunction& question, int token_stride,
                            const std::optional<std::vector<double>>& query_keys) {
    if (examples.empty()) throw ArgumentError("build_prompt: need at least one example");
    require_token_stride(question, token_stride);
    for (const auto& ex : examples) {
        require_compatible(ex.cond, question);
        require_compatible(ex.qoi, question);
    }

    PromptSequence seq;
    const int J = static_cast<int>(examples.size());
    for (int j = 0; j < J; ++j) {
        append_function_block(seq, examples[static_cast<std::size_t>(j)].cond, Role::Condition,
                              j + 1, token_stride);
        append_function_block(seq, examples[static_cast<std::size_t>(j)].qoi, Role::QoI, j + 1,
                              token_stride);
    }
    append_function_block(seq, question, Role::Condition, J + 1, token_stride);
    append_query_block(seq, query_keys ? *query_keys : token_keys(question, token_stride), J + 1);
    seq.num_pairs = J + 1;
    return seq;
}

TrainingPrompt build_training_prompt(const std::vector<CondQoIPair>& pairs, int token_stride) {
    if (pairs.size() < 2) throw ArgumentError("training prompt: need at least two pairs");
    for (const auto& p : pairs) {
        require_compatible(p.cond, pairs.front().cond);
        require_compatible(p.qoi, pairs.front().cond);
    }

    TrainingPrompt out;
    const int I = static_cast<int>(pairs.size());
    for (int i = 0; i < I; ++i) {
        const auto& p = pairs[static_cast<std::size_t>(i)];
        append_function_block(out.prompt, p.cond, Role::Condition, i + 1, token_stride);
        if (i >= 1) {
            // Predictions are read at the QoI keys of this pair.
            append_query_block(out.prompt, token_keys(p.qoi, token_stride), i + 1);
            out.targets.push_back(token_values(p.qoi, token_stride));
        }
        append_function_block(out.prompt, p.qoi, Role::QoI, i + 1, token_stride);
    }
    out.prompt.num_pairs = I;
    return out;
}

} // namespace iconcl
