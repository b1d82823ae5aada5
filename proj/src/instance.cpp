#include "lossroute/instance.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "lossroute/errors.hpp"

namespace lossroute {

namespace {

using json = nlohmann::json;

std::string queue_field(std::size_t k, const char* field) {
    return "queues[" + std::to_string(k) + "]." + field;
}

void validate_queue(const QueueParams& q, std::size_t k) {
    if (q.m < 1) throw ValidationError(queue_field(k, "m") + ": server count must be at least 1");
    if (q.n < q.m) {
        throw ValidationError(queue_field(k, "n") + ": buffer " + std::to_string(q.n) +
                              " is smaller than server count " + std::to_string(q.m));
    }
    if (!std::isfinite(q.mu) || q.mu <= 0) {
        throw ValidationError(queue_field(k, "mu") + ": service rate must be finite and positive");
    }
}

int line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    int line = 1;
    for (std::size_t i = 0; i < offset; ++i) {
        if (text[i] == '\n') ++line;
    }
    return line;
}

double require_number(const json& node, const std::string& field) {
    if (!node.is_number()) throw ValidationError(field + ": expected a number");
    return node.get<double>();
}

int require_integer(const json& node, const std::string& field) {
    if (!node.is_number_integer()) throw ValidationError(field + ": expected an integer");
    const auto v = node.get<std::int64_t>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ValidationError(field + ": integer out of range");
    }
    return static_cast<int>(v);
}

} // namespace

SystemInstance::SystemInstance(double lambda, std::vector<QueueParams> queues)
    : lambda_(lambda), queues_(std::move(queues)) {
    if (!std::isfinite(lambda_) || lambda_ <= 0) {
        throw ValidationError("lambda: arrival rate must be finite and positive");
    }
    if (queues_.empty()) throw ValidationError("queues: at least one queue is required");
    for (std::size_t k = 0; k < queues_.size(); ++k) validate_queue(queues_[k], k);
}

double SystemInstance::total_capacity() const noexcept {
    double total = 0;
    for (const auto& q : queues_) total += q.capacity();
    return total;
}

int SystemInstance::total_buffer() const noexcept {
    int total = 0;
    for (const auto& q : queues_) total += q.n;
    return total;
}

double nominal_load(const SystemInstance& inst) {
    return inst.lambda() / inst.total_capacity();
}

SystemInstance scale_to_nominal_load(const SystemInstance& inst, double target_rho) {
    if (!std::isfinite(target_rho) || target_rho <= 0) {
        throw ValidationError("rho: target nominal load must be finite and positive");
    }
    return SystemInstance(target_rho * inst.total_capacity(),
                          {inst.queues().begin(), inst.queues().end()});
}

std::uint64_t joint_state_count(const SystemInstance& inst) {
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t count = 1;
    for (const auto& q : inst.queues()) {
        const auto radix = static_cast<std::uint64_t>(q.n) + 1;
        if (count > kMax / radix) return kMax;
        count *= radix;
    }
    return count;
}

SystemInstance parse_instance(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const int line = line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
    }
    if (!doc.is_object()) throw ParseError("line 1: instance document must be a JSON object", 1);

    std::optional<double> lambda;
    std::optional<double> rho;
    std::vector<QueueParams> queues;
    bool saw_queues = false;

    for (const auto& [key, value] : doc.items()) {
        if (key == "lambda") {
            lambda = require_number(value, "lambda");
        } else if (key == "rho") {
            rho = require_number(value, "rho");
        } else if (key == "queues") {
            saw_queues = true;
            if (!value.is_array()) throw ValidationError("queues: expected a list of queue records");
            for (std::size_t k = 0; k < value.size(); ++k) {
                const auto& rec = value[k];
                if (!rec.is_object()) {
                    throw ValidationError("queues[" + std::to_string(k) + "]: expected a record");
                }
                QueueParams q;
                bool has_m = false, has_n = false, has_mu = false;
                for (const auto& [field, v] : rec.items()) {
                    if (field == "m") {
                        q.m = require_integer(v, queue_field(k, "m"));
                        has_m = true;
                    } else if (field == "n") {
                        q.n = require_integer(v, queue_field(k, "n"));
                        has_n = true;
                    } else if (field == "mu") {
                        q.mu = require_number(v, queue_field(k, "mu"));
                        has_mu = true;
                    } else {
                        throw ValidationError(queue_field(k, field.c_str()) + ": unknown field");
                    }
                }
                if (!has_m) throw ValidationError(queue_field(k, "m") + ": missing");
                if (!has_n) throw ValidationError(queue_field(k, "n") + ": missing");
                if (!has_mu) throw ValidationError(queue_field(k, "mu") + ": missing");
                queues.push_back(q);
            }
        } else {
            throw ValidationError(key + ": unknown field");
        }
    }

    if (!saw_queues) throw ValidationError("queues: missing");
    if (lambda.has_value() == rho.has_value()) {
        throw ValidationError("lambda/rho: exactly one of the two must be given");
    }
    if (lambda) return SystemInstance(*lambda, std::move(queues));

    // Validate the queues before the rho scaling divides by their capacity.
    SystemInstance unit(1.0, std::move(queues));
    return scale_to_nominal_load(unit, *rho);
}

SystemInstance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path.string() + ": cannot open instance file");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_instance(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string serialize_instance(const SystemInstance& inst) {
    json doc;
    doc["lambda"] = inst.lambda();
    doc["queues"] = json::array();
    for (const auto& q : inst.queues()) {
        doc["queues"].push_back({{"m", q.m}, {"n", q.n}, {"mu", q.mu}});
    }
    return doc.dump(2) + "\n";
}

} // namespace lossroute
