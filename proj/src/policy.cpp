#include "tub/policy.hpp"

namespace tub {

namespace {
NumericPolicy g_policy;
}

const NumericPolicy& policy() { return g_policy; }
void set_policy(const NumericPolicy& p) { g_policy = p; }

} // namespace tub
