// Trajectory and certificate for the renewal kernel a_n = 1/(n(n+1)).

#include <volterra/certify.hpp>
#include <volterra/fixtures.hpp>

#include <cstdio>

int main() {
    const auto kernel = volterra::fixtures::renewal();
    const auto traj = volterra::solve_fast(kernel, 100000);
    for (std::size_t n : {10, 100, 1000, 10000, 100000})
        std::printf("x_%-6zu = %.6f\n", n, traj.values[n]);
    const auto report = volterra::certify(kernel);
    std::printf("%s\n", volterra::verdict_line(report).c_str());
}
