#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "invot/errors.hpp"

namespace invot {

struct Coupling {
    std::size_t n = 0, m = 0;
    std::vector<double> plan;  // row-major n x m

    double at(std::size_t i, std::size_t j) const { return plan[i * m + j]; }
};

struct LPResult {
    Coupling coupling;
    double cost = 0.0;
    std::vector<double> row_dual;  // u_i
    std::vector<double> col_dual;  // v_j
    double gap = 0.0;              // primal minus dual objective
    long iterations = 0;
};

namespace lpdetail {

struct Cell {
    int i, j;
    double flow;
};

} // namespace lpdetail

// Exact transportation simplex (northwest-corner start, Bland's rule, tree
// duals). Balanced problems only: total supply and demand must agree to 1e-9
// relative mass; demand is rescaled to match exactly before solving.
inline LPResult transport_lp(std::vector<double> supply, std::vector<double> demand,
                             const std::vector<double>& cost) {
    const std::size_t n = supply.size(), m = demand.size();
    if (n == 0 || m == 0 || cost.size() != n * m)
        throw std::invalid_argument("transport_lp: size mismatch");
    require(n * m <= 1000000, errc::size_exceeded,
            "problem has " + std::to_string(n * m) + " cells");
    double ss = 0.0, sd = 0.0;
    for (double s : supply) {
        require(std::isfinite(s), errc::non_finite_input, "supply weight");
        require(s >= -1e-15, errc::infeasible, "negative supply weight");
        ss += s;
    }
    for (double d : demand) {
        require(std::isfinite(d), errc::non_finite_input, "demand weight");
        require(d >= -1e-15, errc::infeasible, "negative demand weight");
        sd += d;
    }
    for (double c : cost) require(std::isfinite(c), errc::non_finite_input, "cost entry");
    require(sd > 0.0 && ss > 0.0, errc::infeasible, "zero total mass");
    require(std::fabs(ss - sd) <= 1e-9 * std::max(1.0, ss), errc::infeasible,
            "mass mismatch " + std::to_string(ss - sd));
    const double scale = ss / sd;
    for (double& d : demand) d *= scale;

    using lpdetail::Cell;
    std::vector<Cell> cells;
    cells.reserve(n + m - 1);
    std::vector<std::vector<int>> row_cells(n), col_cells(m);

    auto add_cell = [&](int i, int j, double f) {
        cells.push_back({i, j, f});
        row_cells[std::size_t(i)].push_back(int(cells.size()) - 1);
        col_cells[std::size_t(j)].push_back(int(cells.size()) - 1);
    };
    auto remove_cell = [&](int idx) {
        auto& rc = row_cells[std::size_t(cells[std::size_t(idx)].i)];
        rc.erase(std::find(rc.begin(), rc.end(), idx));
        auto& cc = col_cells[std::size_t(cells[std::size_t(idx)].j)];
        cc.erase(std::find(cc.begin(), cc.end(), idx));
        const int last = int(cells.size()) - 1;
        if (idx != last) {
            for (int& t : row_cells[std::size_t(cells[std::size_t(last)].i)])
                if (t == last) t = idx;
            for (int& t : col_cells[std::size_t(cells[std::size_t(last)].j)])
                if (t == last) t = idx;
            cells[std::size_t(idx)] = cells[std::size_t(last)];
        }
        cells.pop_back();
    };

    {
        std::vector<double> s = supply, d = demand;
        std::size_t i = 0, j = 0;
        while (true) {
            const double f = std::min(s[i], d[j]);
            add_cell(int(i), int(j), f);
            s[i] -= f;
            d[j] -= f;
            if (i == n - 1 && j == m - 1) break;
            if (s[i] <= d[j] && i < n - 1)
                ++i;
            else if (j < m - 1)
                ++j;
            else
                ++i;
        }
    }

    std::vector<double> u(n), v(m);
    std::vector<char> have_u(n), have_v(m);
    std::vector<int> stack;
    auto compute_duals = [&]() {
        std::fill(have_u.begin(), have_u.end(), char(0));
        std::fill(have_v.begin(), have_v.end(), char(0));
        u[0] = 0.0;
        have_u[0] = 1;
        stack.assign(1, 0);  // node id: rows [0,n), cols [n, n+m)
        while (!stack.empty()) {
            const int node = stack.back();
            stack.pop_back();
            if (node < int(n)) {
                for (int idx : row_cells[std::size_t(node)]) {
                    const int j = cells[std::size_t(idx)].j;
                    if (!have_v[std::size_t(j)]) {
                        v[std::size_t(j)] = cost[std::size_t(node) * m + std::size_t(j)] -
                                            u[std::size_t(node)];
                        have_v[std::size_t(j)] = 1;
                        stack.push_back(int(n) + j);
                    }
                }
            } else {
                const int j = node - int(n);
                for (int idx : col_cells[std::size_t(j)]) {
                    const int i = cells[std::size_t(idx)].i;
                    if (!have_u[std::size_t(i)]) {
                        u[std::size_t(i)] = cost[std::size_t(i) * m + std::size_t(j)] -
                                            v[std::size_t(j)];
                        have_u[std::size_t(i)] = 1;
                        stack.push_back(i);
                    }
                }
            }
        }
    };

    std::vector<int> parent_cell(n + m), parent_node(n + m);
    std::vector<char> visited(n + m);
    LPResult res;
    const long max_iters = 200L * long(n + m) * long(n + m) + 10000;
    for (;;) {
        compute_duals();
        int ei = -1, ej = -1;
        for (std::size_t i = 0; i < n && ei < 0; ++i)
            for (std::size_t j = 0; j < m; ++j)
                if (cost[i * m + j] - u[i] - v[j] < -1e-11) {
                    ei = int(i);
                    ej = int(j);
                    break;
                }
        if (ei < 0) break;
        ++res.iterations;
        if (res.iterations > max_iters)
            throw std::runtime_error("transport_lp: iteration bound exceeded");

        // unique tree path from row ei to col ej; the entering cell closes it
        std::fill(visited.begin(), visited.end(), char(0));
        std::vector<int> queue{ei};
        visited[std::size_t(ei)] = 1;
        parent_node[std::size_t(ei)] = -1;
        for (std::size_t qh = 0; qh < queue.size(); ++qh) {
            const int node = queue[qh];
            if (node == int(n) + ej) break;
            if (node < int(n)) {
                for (int idx : row_cells[std::size_t(node)]) {
                    const int nxt = int(n) + cells[std::size_t(idx)].j;
                    if (!visited[std::size_t(nxt)]) {
                        visited[std::size_t(nxt)] = 1;
                        parent_node[std::size_t(nxt)] = node;
                        parent_cell[std::size_t(nxt)] = idx;
                        queue.push_back(nxt);
                    }
                }
            } else {
                for (int idx : col_cells[std::size_t(node - int(n))]) {
                    const int nxt = cells[std::size_t(idx)].i;
                    if (!visited[std::size_t(nxt)]) {
                        visited[std::size_t(nxt)] = 1;
                        parent_node[std::size_t(nxt)] = node;
                        parent_cell[std::size_t(nxt)] = idx;
                        queue.push_back(nxt);
                    }
                }
            }
        }

        std::vector<int> path;  // cells from col ej back to row ei
        for (int node = int(n) + ej; parent_node[std::size_t(node)] >= 0;
             node = parent_node[std::size_t(node)])
            path.push_back(parent_cell[std::size_t(node)]);

        // entering gets +theta; signs alternate along the cycle
        double theta = std::numeric_limits<double>::infinity();
        int leaving = -1;
        long leaving_key = 0;
        for (std::size_t k = 0; k < path.size(); k += 2) {
            const Cell& c = cells[std::size_t(path[k])];
            const long key = long(c.i) * long(m) + long(c.j);
            if (c.flow < theta - 1e-15 || (std::fabs(c.flow - theta) <= 1e-15 && key < leaving_key)) {
                theta = c.flow;
                leaving = path[k];
                leaving_key = key;
            }
        }
        for (std::size_t k = 0; k < path.size(); ++k)
            cells[std::size_t(path[k])].flow += (k % 2 == 0) ? -theta : theta;
        remove_cell(leaving);
        add_cell(ei, ej, theta);
    }

    res.coupling.n = n;
    res.coupling.m = m;
    res.coupling.plan.assign(n * m, 0.0);
    double primal = 0.0;
    for (const auto& c : cells) {
        const double f = std::max(c.flow, 0.0);
        res.coupling.plan[std::size_t(c.i) * m + std::size_t(c.j)] = f;
        primal += f * cost[std::size_t(c.i) * m + std::size_t(c.j)];
    }
    compute_duals();
    double dual = 0.0;
    for (std::size_t i = 0; i < n; ++i) dual += u[i] * supply[i];
    for (std::size_t j = 0; j < m; ++j) dual += v[j] * demand[j];
    res.cost = primal;
    res.row_dual = u;
    res.col_dual = v;
    res.gap = primal - dual;
    return res;
}

} // namespace invot
