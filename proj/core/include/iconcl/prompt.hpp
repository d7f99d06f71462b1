#pragma once

#include <optional>
#include <vector>

#include "iconcl/grid.hpp"

namespace iconcl {

struct CondQoIPair {
    GridFunction cond;
    GridFunction qoi;
    double stride = 0.0;
    int operator_id = -1;
};

enum class Role : int { Condition = 0, QoI = 1, Query = 2 };

/// One input token: a key-value sample of a function plus its block identity.
/// Query tokens carry value 0 and only ask where to evaluate the prediction.
struct Token {
    double key = 0.0;
    double value = 0.0;
    Role role = Role::Condition;
    int pair_index = 1; // 1-based
};

struct Block {
    Role role = Role::Condition;
    int pair_index = 1;
    int start = 0;
    int length = 0;
};

struct PromptSequence {
    std::vector<Token> tokens;
    std::vector<Block> blocks;
    int num_pairs = 0;

    int seq_len() const { return static_cast<int>(tokens.size()); }
};

// Keys/values of a function as tokens, taking every token_stride-th cell.
std::vector<double> token_keys(const GridFunction& g, int token_stride);
std::vector<double> token_values(const GridFunction& g, int token_stride);

// Inference layout C1,Q1,...,CJ,QJ,C_{J+1},R_{J+1}: J example pairs, the
// question as condition J+1, and a query block holding the readout keys
// (defaults to the question's token keys).
PromptSequence build_prompt(const std::vector<CondQoIPair>& examples,
                            const GridFunction& question, int token_stride,
                            const std::optional<std::vector<double>>& query_keys = std::nullopt);

// Training layout C1,Q1,(C_i,R_i,Q_i) for i = 2..I, with queries at the QoI
// token keys. targets[k] holds the QoI token values for the k-th query block.
struct TrainingPrompt {
    PromptSequence prompt;
    std::vector<std::vector<double>> targets;
};
TrainingPrompt build_training_prompt(const std::vector<CondQoIPair>& pairs, int token_stride);

} // namespace iconcl
