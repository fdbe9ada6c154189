// Copyright 2026 The jtele Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace jtele {

struct Check {
    std::string name;
    double residual = 0.0;
    bool pass = false;
};

/// Named residual checks, in the order they were run.
struct Report {
    std::vector<Check> checks;

    void add(const std::string &name, double residual, double bound) {
        checks.push_back({name, residual, residual <= bound});
    }
    void add_flag(const std::string &name, bool pass, double residual = 0.0) {
        checks.push_back({name, residual, pass});
    }
    void append(const Report &other, const std::string &prefix = "") {
        for (const auto &c : other.checks)
            checks.push_back({prefix + c.name, c.residual, c.pass});
    }

    bool ok() const {
        return std::all_of(checks.begin(), checks.end(),
                           [](const Check &c) { return c.pass; });
    }

    const Check *find(const std::string &name) const {
        for (const auto &c : checks)
            if (c.name == name)
                return &c;
        return nullptr;
    }

    double max_residual() const {
        double m = 0.0;
        for (const auto &c : checks)
            m = std::max(m, c.residual);
        return m;
    }
};

} // namespace jtele
