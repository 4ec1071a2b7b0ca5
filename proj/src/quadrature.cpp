#include "fcgam/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace fcgam {

namespace {

// QUADPACK dqk15 tables: Kronrod abscissae/weights plus embedded Gauss weights.
constexpr int kHalf15 = 8;
constexpr double kXgk15[kHalf15] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk15[kHalf15] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg15[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// QUADPACK dqk31 tables.
constexpr int kHalf31 = 16;
constexpr double kXgk31[kHalf31] = {
    0.998002298693397060285172840152271, 0.987992518020485428489565718586613,
    0.967739075679139134257347978784337, 0.937273392400705904307758947710209,
    0.897264532344081900882509656454496, 0.848206583410427216200648320774217,
    0.790418501442465932967649294817947, 0.724417731360170047416186054613938,
    0.650996741297416970533735895313275, 0.570972172608538847537226737253911,
    0.485081863640239680693655740232351, 0.394151347077563369897207370981045,
    0.299180007153168812166780024266389, 0.201194093997434522300628303394596,
    0.101142066918717499027074231447392, 0.0};
constexpr double kWgk31[kHalf31] = {
    0.005377479872923348987792051430128, 0.015007947329316122538374763075807,
    0.025460847326715320186874001019653, 0.035346360791375846222037948478360,
    0.044589751324764876608227299373280, 0.053481524690928087265343147239430,
    0.062009567800670640285139230960803, 0.069854121318728258709520077099147,
    0.076849680757720378894432777482659, 0.083080502823133021038289247286104,
    0.088564443056211770647275443693774, 0.093126598170825321225486872747346,
    0.096642726983623678505179907627589, 0.099173598721791959332393173484603,
    0.100769845523875595044946662617570, 0.101330007014791549017374792767493};
constexpr double kWg31[8] = {
    0.030753241996117268354628393577204, 0.070366047488108124709267416450667,
    0.107159220467171935011869546685869, 0.139570677926154314447804794511028,
    0.166269205816993933553200860481209, 0.186161000015562211026800561866423,
    0.198431485327111576456118326443839, 0.202578241925561272880620199967519};

struct Panel {
  double a, b;
  double value;
  double err;
};

// One Gauss-Kronrod panel on [a, b]. Error estimate follows QUADPACK:
// scale the raw |K - G| difference by the integrand's deviation resasc so
// the estimate stays meaningful for integrals far from unit magnitude.
template <int Half>
Panel gk_panel(const std::function<double(double)>& f, double a, double b,
               const double* xgk, const double* wgk, const double* wg) {
  const double center = 0.5 * (a + b);
  const double hlgth = 0.5 * (b - a);

  double fval[2 * Half - 1];
  const double fc = f(center);
  fval[Half - 1] = fc;
  for (int j = 0; j < Half - 1; ++j) {
    const double dx = hlgth * xgk[j];
    fval[j] = f(center - dx);
    fval[2 * Half - 2 - j] = f(center + dx);
  }

  double resk = wgk[Half - 1] * fc;
  double resg = (Half % 2 == 0) ? wg[Half / 2 - 1] * fc : 0.0;
  double resabs = std::abs(resk);
  for (int j = 0; j < Half - 1; ++j) {
    const double fsum = fval[j] + fval[2 * Half - 2 - j];
    resk += wgk[j] * fsum;
    resabs += wgk[j] * (std::abs(fval[j]) + std::abs(fval[2 * Half - 2 - j]));
    if (j % 2 == 1) resg += wg[j / 2] * fsum;
  }
  const double reskh = resk * 0.5;
  double resasc = wgk[Half - 1] * std::abs(fc - reskh);
  for (int j = 0; j < 2 * Half - 1; ++j) {
    if (j == Half - 1) continue;
    resasc += wgk[j < Half ? j : 2 * Half - 2 - j] * std::abs(fval[j] - reskh);
  }

  resk *= hlgth;
  resg *= hlgth;
  resasc *= std::abs(hlgth);
  resabs *= std::abs(hlgth);

  double err = std::abs(resk - resg);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  const double uflow = std::numeric_limits<double>::min();
  const double epmach = std::numeric_limits<double>::epsilon();
  if (resabs > uflow / (50.0 * epmach)) {
    err = std::max(epmach * 50.0 * resabs, err);
  }
  return {a, b, resk, err};
}

Panel eval_panel(const std::function<double(double)>& f, double a, double b, int node_count) {
  if (node_count >= 31) {
    return gk_panel<kHalf31>(f, a, b, kXgk31, kWgk31, kWg31);
  }
  return gk_panel<kHalf15>(f, a, b, kXgk15, kWgk15, kWg15);
}

}  // namespace

void QuadratureConfig::validate() const {
  if (node_count < 15) throw ValidationError("quadrature: node_count must be >= 15");
  if (abs_tol < 0 || rel_tol < 0) throw ValidationError("quadrature: tolerances must be >= 0");
  if (abs_tol == 0 && rel_tol == 0)
    throw ValidationError("quadrature: abs_tol and rel_tol cannot both be zero");
  if (max_subdivisions < 1) throw ValidationError("quadrature: max_subdivisions must be positive");
}

QuadResult integrate_interval(const std::function<double(double)>& f, double a, double b,
                              const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(a < b)) throw ValidationError("quadrature: empty or inverted interval");

  std::vector<Panel> panels;
  panels.reserve(static_cast<size_t>(cfg.max_subdivisions) + 2);
  panels.push_back(eval_panel(f, a, b, cfg.node_count));

  double value = panels[0].value;
  double err = panels[0].err;
  int subdivisions = 0;

  while (err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(value))) {
    if (subdivisions >= cfg.max_subdivisions) {
      throw QuadratureError("quadrature: subdivision budget exhausted", value, err);
    }
    // Worst panel first; ties broken by position so refinement is deterministic.
    size_t worst = 0;
    for (size_t i = 1; i < panels.size(); ++i) {
      if (panels[i].err > panels[worst].err ||
          (panels[i].err == panels[worst].err && panels[i].a < panels[worst].a)) {
        worst = i;
      }
    }
    const Panel old = panels[worst];
    const double mid = 0.5 * (old.a + old.b);
    if (!(old.a < mid && mid < old.b)) {
      // Interval at floating-point resolution: cannot refine further.
      throw QuadratureError("quadrature: interval too small to subdivide", value, err);
    }
    const Panel left = eval_panel(f, old.a, mid, cfg.node_count);
    const Panel right = eval_panel(f, mid, old.b, cfg.node_count);
    panels[worst] = left;
    panels.push_back(right);
    value += left.value + right.value - old.value;
    err += left.err + right.err - old.err;
    ++subdivisions;
  }

  // Recompute the sums once to shed accumulated cancellation.
  value = 0.0;
  err = 0.0;
  for (const Panel& p : panels) {
    value += p.value;
    err += p.err;
  }
  return {value, err};
}

QuadResult integrate_unit_interval(const std::function<double(double)>& f,
                                   const QuadratureConfig& cfg) {
  return integrate_interval(f, 0.0, 1.0, cfg);
}

}  // namespace fcgam
