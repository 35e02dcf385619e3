#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "sobocomp/engine.hpp"
#include "sobocomp/errors.hpp"
#include "sobocomp/muckenhoupt.hpp"

namespace sobocomp {

// Deterministic JSON output: object keys render sorted, numbers render with
// 17 significant digits, so identical inputs produce identical bytes.
class Json {
public:
    using Obj = std::map<std::string, Json>;
    using Arr = std::vector<Json>;

    Json() : v_(nullptr) {}
    Json(bool b) : v_(b) {}
    Json(double d) : v_(d) {}
    Json(int i) : v_(static_cast<long long>(i)) {}
    Json(long long i) : v_(i) {}
    Json(const char* s) : v_(std::string(s)) {}
    Json(std::string s) : v_(std::move(s)) {}
    Json(Arr a) : v_(std::move(a)) {}

    static Json object() {
        Json j;
        j.v_ = Obj{};
        return j;
    }
    static Json array() {
        Json j;
        j.v_ = Arr{};
        return j;
    }

    Json& operator[](const std::string& key) {
        if (!std::holds_alternative<Obj>(v_)) v_ = Obj{};
        return std::get<Obj>(v_)[key];
    }

    void push_back(Json j) {
        if (!std::holds_alternative<Arr>(v_)) v_ = Arr{};
        std::get<Arr>(v_).push_back(std::move(j));
    }

    static std::string number(double d) {
        if (std::isnan(d)) fail_invariant("report: NaN is not serializable");
        if (std::isinf(d)) return d > 0 ? "\"inf\"" : "\"-inf\"";
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", d);
        return buf;
    }

    void dump(std::ostream& os) const {
        struct V {
            std::ostream& os;
            void operator()(std::nullptr_t) const { os << "null"; }
            void operator()(bool b) const { os << (b ? "true" : "false"); }
            void operator()(long long i) const { os << i; }
            void operator()(double d) const { os << number(d); }
            void operator()(const std::string& s) const {
                os << '"';
                for (char c : s) {
                    switch (c) {
                        case '"': os << "\\\""; break;
                        case '\\': os << "\\\\"; break;
                        case '\n': os << "\\n"; break;
                        case '\t': os << "\\t"; break;
                        default: os << c;
                    }
                }
                os << '"';
            }
            void operator()(const Arr& a) const {
                os << '[';
                for (size_t i = 0; i < a.size(); ++i) {
                    if (i) os << ',';
                    a[i].dump(os);
                }
                os << ']';
            }
            void operator()(const Obj& o) const {
                os << '{';
                bool first = true;
                for (const auto& [k, v] : o) {
                    if (!first) os << ',';
                    first = false;
                    os << '"' << k << "\":";
                    v.dump(os);
                }
                os << '}';
            }
        };
        std::visit(V{os}, v_);
    }

    std::string str() const {
        std::ostringstream os;
        dump(os);
        return os.str();
    }

private:
    std::variant<std::nullptr_t, bool, long long, double, std::string, Arr, Obj> v_;
};

inline std::string fmt17(double d) {
    if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_io("cannot open for writing: " + path);
    out << content;
    if (!out) fail_io("write failed: " + path);
}

// --- CSV emitters (fixed column orders) --------------------------------------

inline std::string cover_csv(const CoverPlan& plan, const GridDomain& dom) {
    std::ostringstream os;
    os << "# eps=" << fmt17(plan.epsilon) << ",M=" << plan.overlap_M
       << ",coverage_deficit=" << fmt17(plan.coverage_deficit) << "\n";
    os << "ell,center_x1,center_x2,center_x3,radius,E_size,w_E\n";
    for (size_t l = 0; l < plan.pairs.size(); ++l) {
        const auto& p = plan.pairs[l];
        auto x = dom.center(p.center);
        os << l << ',' << fmt17(x[0]) << ',' << fmt17(x[1]) << ',' << fmt17(x[2]) << ','
           << fmt17(p.radius) << ',' << p.E.size() << ',' << fmt17(p.wE) << "\n";
    }
    return os.str();
}

inline std::string extraction_csv(const ExtractionReport& rep) {
    std::ostringstream os;
    os << "eps,J,radius,M,I,II,modulus,bound_L1,T_eps\n";
    for (const auto& lvl : rep.levels) {
        os << fmt17(lvl.eps) << ',' << lvl.J << ',' << fmt17(lvl.radius) << ',' << lvl.overlap_M
           << ',' << fmt17(lvl.I) << ',' << fmt17(lvl.II) << ',' << fmt17(lvl.pairwise_modulus)
           << ',' << fmt17(lvl.bound_L1_cover + lvl.bound_L1_tail) << ',' << lvl.T_eps << "\n";
    }
    return os.str();
}

inline std::string field_csv(const ScalarField& f) {
    std::ostringstream os;
    os << "cell,x1,x2,x3,value\n";
    const auto& dom = *f.dom;
    for (int32_t a = 0; a < dom.n_active(); ++a) {
        auto x = dom.center(a);
        os << a << ',' << fmt17(x[0]) << ',' << fmt17(x[1]) << ',' << fmt17(x[2]) << ','
           << fmt17(f.v[static_cast<size_t>(a)]) << "\n";
    }
    return os.str();
}

inline std::string ap_csv(const ApReport& rep) {
    std::ostringstream os;
    os << "ball,ratio\n";
    for (const auto& b : rep.balls) os << b.ball_index << ',' << fmt17(b.ratio) << "\n";
    return os.str();
}

inline Json extraction_json(const ExtractionReport& rep) {
    Json j = Json::object();
    j["M_declared"] = rep.M;
    j["M_measured"] = rep.M_measured;
    j["C1"] = rep.C1;
    j["C2"] = rep.C2;
    j["closure_note"] = rep.closure_note;
    j["limit_index"] = static_cast<long long>(rep.limit_index);
    Json sub = Json::array();
    for (int i : rep.subsequence) sub.push_back(static_cast<long long>(i));
    j["subsequence"] = std::move(sub);
    Json levels = Json::array();
    for (const auto& lvl : rep.levels) {
        Json row = Json::object();
        row["eps"] = lvl.eps;
        row["J"] = static_cast<long long>(lvl.J);
        row["radius"] = lvl.radius;
        row["overlap_M"] = static_cast<long long>(lvl.overlap_M);
        row["worst_quotient"] = lvl.worst_quotient;
        row["T_eps"] = static_cast<long long>(lvl.T_eps);
        row["I"] = lvl.I;
        row["II"] = lvl.II;
        row["modulus_p"] = lvl.pairwise_modulus;
        row["modulus_L1"] = lvl.modulus_L1;
        row["bound_L1"] = lvl.bound_L1_cover + lvl.bound_L1_tail;
        row["bound_L1_cover"] = lvl.bound_L1_cover;
        row["bound_L1_tail"] = lvl.bound_L1_tail;
        levels.push_back(std::move(row));
    }
    j["levels"] = std::move(levels);
    Json qt = Json::array();
    for (const auto& row : rep.q_table) {
        Json r = Json::object();
        r["q"] = row.q;
        r["lambda"] = row.lambda;
        r["modulus"] = row.modulus;
        r["bound"] = row.bound;
        qt.push_back(std::move(r));
    }
    j["q_table"] = std::move(qt);
    return j;
}

}  // namespace sobocomp
