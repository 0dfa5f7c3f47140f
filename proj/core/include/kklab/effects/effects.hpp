#pragma once

#include <string>
#include <vector>

#include "kklab/effects/eval.hpp"

namespace kklab::effects {

// sample effect V(a, s, theta): inner product of the evaluation-set policy
// gradient with the sample's log-probability gradient
double sample_effect(const policy::PolicyModel& model, std::span<const double> params,
                     const policy::PromptContext& prompt, const policy::TokenSeq& response,
                     std::span<const double> eval_grad);

struct DriftReport {
    double mu_rl = 0.0;
    double mu_sft = 0.0;    // only meaningful when a target policy was given
    double delta_mu = 0.0;  // mu_sft - mu_rl
    bool has_sft = false;
    std::string method;
};

// mu_rl = E_{s ~ D_t, a ~ pi}[V r]; exact enumeration
double drift_rl(const policy::PolicyModel& model, std::span<const double> params,
                const task::PromptSet& train_set, const EvalGradient& eval_grad,
                double budget = policy::kDefaultEnumerationBudget);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Monte-Carlo mu_rl with a standard error over samples
McEstimate drift_rl_mc(const policy::PolicyModel& model, std::span<const double> params,
                       const task::PromptSet& train_set, const EvalGradient& eval_grad,
                       int samples_per_prompt, std::uint64_t seed);

// mu_sft = E_{s ~ D_t, a ~ filtered target}[V r] with the correctness filter
// pi_hat = pi_target * r / p_target(s). Throws when some prompt has
// p_target(s) = 0, listing the offending prompts.
double drift_sft(const policy::PolicyModel& model, std::span<const double> params,
                 std::span<const double> target_params, const task::PromptSet& train_set,
                 const EvalGradient& eval_grad,
                 double budget = policy::kDefaultEnumerationBudget);

// dataset effect V(theta, theta_target, D_t); same expectation as drift_sft
double dataset_effect(const policy::PolicyModel& model, std::span<const double> params,
                      std::span<const double> target_params, const task::PromptSet& train_set,
                      const EvalGradient& eval_grad,
                      double budget = policy::kDefaultEnumerationBudget);

// delta drift computed directly as a single expectation under pi:
// E[V (pi_target / (p_target pi) - 1) r]; algebraically equals
// drift_sft - drift_rl and is computed along an independent route
double delta_drift_direct(const policy::PolicyModel& model, std::span<const double> params,
                          std::span<const double> target_params,
                          const task::PromptSet& train_set, const EvalGradient& eval_grad,
                          double budget = policy::kDefaultEnumerationBudget);

DriftReport drift_report(const policy::PolicyModel& model, std::span<const double> params,
                         const std::vector<double>* target_params,
                         const task::PromptSet& train_set, const EvalGradient& eval_grad,
                         double budget = policy::kDefaultEnumerationBudget);

}  // namespace kklab::effects
