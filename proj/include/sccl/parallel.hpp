#pragma once

namespace sccl {

// Thread count used by the compute kernels. Results do not depend on it: every
// output element is accumulated by exactly one thread in a fixed order.
void set_num_threads(int n);
int num_threads();

}  // namespace sccl
