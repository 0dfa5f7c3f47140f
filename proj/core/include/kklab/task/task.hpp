#pragma once

#include <memory>
#include <numeric>
#include <vector>

#include "kklab/policy/policy.hpp"

namespace kklab::task {

// A prompt set with a binary correctness predicate. Everything downstream
// (training, effects, analysis) works against this interface so the exact
// oracles run unchanged on puzzle tasks and on tiny synthetic instances.
class Task {
  public:
    virtual ~Task() = default;

    virtual const policy::Vocab& vocab() const = 0;
    virtual int l_max() const = 0;
    virtual int n_prompts() const = 0;
    virtual const policy::PromptContext& prompt(int index) const = 0;

    // r(a, s) in {0, 1}
    virtual int reward(int prompt_index, const policy::TokenSeq& response) const = 0;
};

// view over a subset of a task's prompts (training set, evaluation set, ...)
struct PromptSet {
    const Task* task = nullptr;
    std::vector<int> indices;

    static PromptSet all(const Task& t) {
        PromptSet s;
        s.task = &t;
        s.indices.resize(std::size_t(t.n_prompts()));
        std::iota(s.indices.begin(), s.indices.end(), 0);
        return s;
    }

    std::size_t size() const { return indices.size(); }
    bool empty() const { return indices.empty(); }
};

// policy descriptor sized for a task
policy::PolicyModel make_policy_model(const Task& task, policy::PolicyKind kind,
                                      int context_order);

}  // namespace kklab::task
