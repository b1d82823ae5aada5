#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lossroute {

/// One station: m servers of rate mu each, room for n jobs in total.
struct QueueParams {
    int m = 1;
    int n = 1;
    double mu = 1.0;

    double capacity() const noexcept { return m * mu; }
    /// Total departure rate with x jobs present.
    double departure_rate(int x) const noexcept { return (x < m ? x : m) * mu; }

    friend bool operator==(const QueueParams&, const QueueParams&) = default;
};

/// Poisson arrivals at rate lambda routed to K parallel stations. Validated on
/// construction and immutable afterwards. Queue order is significant.
class SystemInstance {
public:
    SystemInstance(double lambda, std::vector<QueueParams> queues);

    double lambda() const noexcept { return lambda_; }
    std::span<const QueueParams> queues() const noexcept { return queues_; }
    const QueueParams& queue(std::size_t k) const { return queues_.at(k); }
    std::size_t size() const noexcept { return queues_.size(); }

    /// Sum of m_k mu_k.
    double total_capacity() const noexcept;
    int total_buffer() const noexcept;

    friend bool operator==(const SystemInstance&, const SystemInstance&) = default;

private:
    double lambda_;
    std::vector<QueueParams> queues_;
};

/// lambda / sum_k m_k mu_k.
double nominal_load(const SystemInstance& inst);

/// Copy of inst with lambda rescaled so that the nominal load equals target_rho.
SystemInstance scale_to_nominal_load(const SystemInstance& inst, double target_rho);

/// prod_k (n_k + 1). Saturates at UINT64_MAX instead of wrapping.
std::uint64_t joint_state_count(const SystemInstance& inst);

/// Parses the JSON instance document:
///   {"lambda": 190, "queues": [{"m": 1, "n": 16, "mu": 80}, ...]}
/// with exactly one of "lambda" / "rho". Throws ParseError on malformed
/// text and ValidationError naming the offending field otherwise.
SystemInstance parse_instance(std::string_view text);

SystemInstance load_instance(const std::filesystem::path& path);

/// Inverse of parse_instance; always writes the "lambda" form.
std::string serialize_instance(const SystemInstance& inst);

} // namespace lossroute
