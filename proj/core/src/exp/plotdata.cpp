#include "kklab/exp/plotdata.hpp"

#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "kklab/util/io.hpp"

namespace kklab::exp {

using nlohmann::json;

namespace {

std::string series_name(bool merged, const std::filesystem::path& input,
                        const std::string& metric) {
    if (!merged) return metric;
    return input.stem().string() + ":" + metric;
}

void require_exists(const std::filesystem::path& p) {
    if (!std::filesystem::exists(p))
        throw std::runtime_error("plot-data: missing input " + p.string());
}

}  // namespace

void emit_plotdata(const std::string& kind, const std::vector<std::filesystem::path>& inputs,
                   const std::filesystem::path& output) {
    if (inputs.empty()) throw std::invalid_argument("plot-data: no inputs");
    const bool merged = inputs.size() > 1;
    std::ostringstream out;

    if (kind == "rl-trace") {
        out << "step\tseries\tvalue\n";
        for (const auto& input : inputs) {
            require_exists(input);
            for (const auto& line : read_lines(input)) {
                const auto j = json::parse(line);
                const int step = j.at("step").get<int>();
                for (const char* metric :
                     {"train_acc", "mean_len", "entropy", "clip_frac", "loss"}) {
                    if (!j.contains(metric)) continue;
                    out << step << '\t' << series_name(merged, input, metric) << '\t'
                        << j.at(metric).dump() << '\n';
                }
            }
        }
    } else if (kind == "effects") {
        out << "dataset\tmode\tmean\tci_low\tci_high\n";
        for (const auto& input : inputs) {
            require_exists(input);
            for (const auto& line : read_lines(input)) {
                const auto j = json::parse(line);
                out << j.at("dataset").get<std::string>() << '\t'
                    << j.at("mode").get<std::string>() << '\t' << j.at("mean").dump() << '\t'
                    << j.at("ci_low").dump() << '\t' << j.at("ci_high").dump() << '\n';
            }
        }
    } else if (kind == "interp") {
        out << "lambda\tseries\tvalue\n";
        for (const auto& input : inputs) {
            require_exists(input);
            for (const auto& line : read_lines(input)) {
                const auto j = json::parse(line);
                out << j.at("lambda").dump() << '\t' << series_name(merged, input, "accuracy")
                    << '\t' << j.at("accuracy").dump() << '\n';
            }
        }
    } else if (kind == "positions") {
        out << "position\tseries\tvalue\n";
        for (const auto& input : inputs) {
            require_exists(input);
            for (const auto& line : read_lines(input)) {
                const auto j = json::parse(line);
                const std::string step = std::to_string(j.at("step").get<int>());
                out << j.at("position").get<int>() << '\t'
                    << series_name(merged, input, "step" + step + ":mean") << '\t'
                    << j.at("mean_logprob").dump() << '\n';
                out << j.at("position").get<int>() << '\t'
                    << series_name(merged, input, "step" + step + ":quantile") << '\t'
                    << j.at("quantile_logprob").dump() << '\n';
            }
        }
    } else if (kind == "modes") {
        out << "step\tseries\tvalue\n";
        for (const auto& input : inputs) {
            require_exists(input);
            for (const auto& line : read_lines(input)) {
                const auto j = json::parse(line);
                out << j.at("step").get<int>() << '\t'
                    << series_name(merged, input, j.at("label").get<std::string>()) << '\t'
                    << j.at("proportion").dump() << '\n';
            }
        }
    } else {
        throw std::invalid_argument("plot-data: unknown kind '" + kind + "'");
    }
    write_file_atomic(output, out.str());
}

}  // namespace kklab::exp
