#include <cstdio>

#include "circuitlp/augment.hpp"
#include "circuitlp/generators.hpp"

using namespace circuitlp;

int main() {
  auto blk = make_polarized_block(3, {0, 450, 900});
  Eigen::VectorXd x = *blk.x0;
  long steps = 0;
  for (; steps < 20000; ++steps) {
    WallacherStep ws;
    try {
      ws = wallacher_step(blk, x, 1e-280);
    } catch (const std::exception& e) {
      std::printf("throw at step %ld gap=%.17g x=(%g,%g,%g,%g,%g,%g): %s\n", steps, blk.gap(x),
                  x[0], x[1], x[2], x[3], x[4], x[5], e.what());
      return 1;
    }
    if (ws.rc.status == LpStatus::Unbounded) {
      std::printf("UNBOUNDED at step %ld gap=%.17g\n  x=(%.17g,%.17g,%.17g,%.17g,%.17g,%.17g)\n",
                  steps, blk.gap(x), x[0], x[1], x[2], x[3], x[4], x[5]);
      std::printf("  z=(%g,%g,%g,%g,%g,%g) lambda=%g pivots=%ld\n", ws.rc.z[0], ws.rc.z[1],
                  ws.rc.z[2], ws.rc.z[3], ws.rc.z[4], ws.rc.z[5], ws.rc.lambda, ws.rc.pivots);
      return 1;
    }
    if (ws.optimal) {
      std::printf("optimal at step %ld gap=%.17g lambda=%g\n", steps, blk.gap(x), ws.rc.lambda);
      return 0;
    }
    x = ws.x_next;
  }
  std::printf("no termination in %ld steps gap=%g\n", steps, blk.gap(x));
  return 0;
}
