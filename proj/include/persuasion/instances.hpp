#pragma once

#include "persuasion/model.hpp"
#include "persuasion/reduced_form.hpp"

namespace persuasion {

/// Buyer-seller menu: three buyer tastes (0.3, 0.45, 0.6, equally likely),
/// uniform quality on [0,1], unit price 10/3, marginal value of the k-th
/// unit (taste + quality) * max(5-k, 0); the seller maximizes expected units
/// sold.  Quantities above two are never purchased.
Problem buyer_problem();

/// Single type on uniform [0,1] with a pass/act cutoff at 0.75; the
/// designer is paid 1 when the receiver acts.  The optimum pools [0.5, 1]
/// into an atom at the cutoff: p = (0.5, 0.5), z2 = 0.375, objective 0.5.
Problem threshold_problem();

/// Public-vs-private gap instance with n equally likely types sharing the
/// piecewise-linear-in-m^2 indirect utility anchored at the grid
///   bL_k = 1/4 + sgn(k)/8 * sqrt(|k|/2n),  bR_k = 3/4 + sgn(k)/8 * sqrt(|k|/2n),
/// and designer reward 1 exactly on four type-specific cells.  Private
/// menus extract payoff 1; any public signal caps at 1/n.
Problem public_private_problem(int n);

/// The explicit four-atom private menu for public_private_problem(n):
/// per type equiprobable atoms at bL_{2t}, bL_{-2t}, bR_{2n+2-2t},
/// bR_{2t-2n-2}, assigned to their reward-1 cells.
MenuSolution public_private_explicit_menu(const Problem& problem, int n);

/// Recomputes the deviation-payoff linearizers y from (p, z); they are
/// tight at any optimum, so this is how hand-built menus get their y.
void rebuild_y(MenuSolution& sol);

}  // namespace persuasion
