// Times the serial reference kernels against the OpenMP kernels on the
// largest benchmark instance and checks that their outputs agree bitwise.
//
//   bench_kernels [instance.json] [sweeps]

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "lossroute/exact_mdp.hpp"
#include "lossroute/instance.hpp"
#include "lossroute/kernels.hpp"

using namespace lossroute;

namespace {

template <typename F>
double seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    const SystemInstance inst =
        argc > 1 ? load_instance(argv[1])
                 : SystemInstance(190.0, {{1, 18, 80.0}, {4, 18, 15.0}, {10, 18, 5.0}});
    const int sweeps = argc > 2 ? std::atoi(argv[2]) : 500;

    const ChainModel model(inst);
    const std::size_t n = model.space.size();
    std::vector<double> h(n);
    for (std::size_t s = 0; s < n; ++s) h[s] = 1e-3 * static_cast<double>(s % 97);
    std::vector<double> rhs_serial(n), rhs_omp(n), flow_serial(n), flow_omp(n);
    std::vector<int> act_serial(n), act_omp(n);

    const double t_bellman_serial = seconds([&] {
        for (int i = 0; i < sweeps; ++i) bellman_sweep_serial(model, h, rhs_serial, act_serial);
    });
    const double t_bellman_omp = seconds([&] {
        for (int i = 0; i < sweeps; ++i) bellman_sweep_omp(model, h, rhs_omp, act_omp);
    });

    std::vector<double> pi(n, 1.0 / static_cast<double>(n));
    const double t_flow_serial = seconds([&] {
        for (int i = 0; i < sweeps; ++i) balance_flow_serial(model, act_serial, pi, flow_serial);
    });
    const double t_flow_omp = seconds([&] {
        for (int i = 0; i < sweeps; ++i) balance_flow_omp(model, act_serial, pi, flow_omp);
    });

    const bool same = rhs_serial == rhs_omp && act_serial == act_omp && flow_serial == flow_omp;
    std::cout << "states " << n << ", sweeps " << sweeps << ", threads " << kernel_threads() << '\n'
              << "bellman  serial " << t_bellman_serial << " s  openmp " << t_bellman_omp
              << " s  speedup " << t_bellman_serial / t_bellman_omp << '\n'
              << "balance  serial " << t_flow_serial << " s  openmp " << t_flow_omp
              << " s  speedup " << t_flow_serial / t_flow_omp << '\n'
              << "outputs " << (same ? "identical" : "DIFFER") << '\n';

    const double t_solve = seconds([&] { (void)optimal_loss(inst); });
    std::cout << "optimal_loss end to end " << t_solve << " s\n";
    return same ? 0 : 1;
}
