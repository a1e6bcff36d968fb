#pragma once

#include <map>

#include "llad/linear_a.hpp"

namespace llad::lina {

// Forward transformation on purely primal expressions. `phi` associates each
// free primal variable with its tangent sibling and must cover FV(e).
LinPtr jax_forward(const LinPtr& ep, const std::map<std::string, std::string>& phi,
                   FreshSupply& supply);

// Unzipping: Linear A (sugar allowed; desugared internally) to Linear B.
LinPtr jax_unzip(const LinPtr& e, FreshSupply& supply);

// Transpose of a Linear B expression against an enumeration theta of its
// free tangent variables and a fresh adjoint variable of the tangent result
// type. Output type pairs the primal with the tensor over theta.
LinPtr jax_transpose(const LinPtr& d, const std::vector<std::pair<std::string, JTPtr>>& theta,
                     const std::string& adjoint, FreshSupply& supply);

struct JaxTransposed {
    LinPtr expr;
    std::string adjoint;
    JTPtr adjoint_type;
    std::vector<std::pair<std::string, JTPtr>> theta;
};

// Convenience wrapper: canonical theta, fresh adjoint.
JaxTransposed jax_transpose_canonical(const LinPtr& d, FreshSupply& supply);

// The partial derivative of f with respect to argument i (1-based) as a
// purely primal Linear A expression over the argument variables.
LinPtr jax_deriv(const std::string& f, int i, const std::vector<std::string>& args,
                 FreshSupply& supply);

}  // namespace llad::lina
