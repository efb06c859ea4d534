#include "hermite/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hermite/errors.hpp"

namespace hermite {

namespace {

// Symmetric orbits in barycentric coordinates. Weights are area-normalized
// (sum to 1) and scaled by 1/2 when the rule is finalized.
struct RuleBuilder
{
    QuadRule rule;

    void centroid(double w)
    {
        rule.points.push_back({ 1.0 / 3.0, 1.0 / 3.0 });
        rule.weights.push_back(w);
    }

    // (a, a, 1 - 2a) and permutations
    void orbit3(double a, double w)
    {
        const double c = 1.0 - 2.0 * a;
        rule.points.push_back({ a, a });
        rule.points.push_back({ a, c });
        rule.points.push_back({ c, a });
        for (int i = 0; i < 3; ++i)
            rule.weights.push_back(w);
    }

    // (a, b, 1 - a - b) and permutations
    void orbit6(double a, double b, double w)
    {
        const double c = 1.0 - a - b;
        rule.points.push_back({ a, b });
        rule.points.push_back({ b, a });
        rule.points.push_back({ a, c });
        rule.points.push_back({ c, a });
        rule.points.push_back({ b, c });
        rule.points.push_back({ c, b });
        for (int i = 0; i < 6; ++i)
            rule.weights.push_back(w);
    }

    QuadRule finish(int degree)
    {
        for (double& w : rule.weights)
            w *= 0.5;
        rule.exact_degree = degree;
        return std::move(rule);
    }
};

// Dunavant rules with positive weights and interior points only.
QuadRule
dunavant(int degree)
{
    RuleBuilder r;
    switch (degree) {
        case 1:
            r.centroid(1.0);
            break;
        case 2:
            r.orbit3(1.0 / 6.0, 1.0 / 3.0);
            break;
        case 4:
            r.orbit3(0.44594849091596488631832925388305, 0.22338158967801146569500700843312);
            r.orbit3(0.09157621350977074345957146340220, 0.10995174365532186763832632490021);
            break;
        case 5: {
            const double s = std::sqrt(15.0);
            r.centroid(0.225);
            r.orbit3((6.0 + s) / 21.0, (155.0 + s) / 1200.0);
            r.orbit3((6.0 - s) / 21.0, (155.0 - s) / 1200.0);
            break;
        }
        case 6:
            r.orbit3(0.24928674517091042129163855310702, 0.11678627572637936602528961138558);
            r.orbit3(0.06308901449150222834033160287082, 0.05084490637020681692093680910686);
            r.orbit6(0.31035245103378440541660773395655,
                     0.05314504984481694735324967163139,
                     0.08285107561837357519355345642044);
            break;
        case 8:
            r.centroid(0.14431560767778716825109111048906);
            r.orbit3(0.45929258829272315602881551449417, 0.09509163426728462479389610438858);
            r.orbit3(0.17056930775176020662229350149146, 0.10321737053471825028179155029212);
            r.orbit3(0.05054722831703097545842355059660, 0.03245849762319808031092592834178);
            r.orbit6(0.26311282963463811342178578628464,
                     0.00839477740995760533721383453930,
                     0.02723031417443499426484469007390);
            break;
        case 9:
            r.centroid(0.09713579628279609890744676309485);
            r.orbit3(0.48968251919873762778370692483619, 0.03133470022713983234393199080984);
            r.orbit3(0.43708959149293663726993036443535, 0.07782754100477543338465495857972);
            r.orbit3(0.18820353561903273024096128046733, 0.07964773892720910288013526957424);
            r.orbit3(0.04472951339445297061024247196780, 0.02557767565869810438673914467637);
            r.orbit6(0.22196298916076569567510252769319,
                     0.03683841205473628363481759533607,
                     0.04328353937728937728937728937729);
            break;
        case 10:
            r.centroid(0.090817990382754);
            r.orbit3(0.485577633383657, 0.036725957756467);
            r.orbit3(0.109481575485037, 0.045321059435528);
            r.orbit6(0.141707219414880, 0.307939838764121, 0.072757916845420);
            r.orbit6(0.025003534762686, 0.246672560639903, 0.028327242531057);
            r.orbit6(0.009540815400299, 0.066803251012200, 0.009421666963733);
            break;
        case 12:
            r.orbit3(0.488217389773805, 0.025731066440455);
            r.orbit3(0.439724392294460, 0.043692544538038);
            r.orbit3(0.271210385012116, 0.062858224217885);
            r.orbit3(0.127576145541586, 0.034796112930709);
            r.orbit3(0.021317350453210, 0.006166261051559);
            r.orbit6(0.115343494534698, 0.275713269685514, 0.040371557766381);
            r.orbit6(0.022838332222257, 0.281325580989940, 0.022356773202303);
            r.orbit6(0.025734050548330, 0.116251915907597, 0.017316231108659);
            break;
        case 13:
            r.centroid(0.052520923400802);
            r.orbit3(0.495048184939705, 0.011280145209330);
            r.orbit3(0.468716635109574, 0.031423518362454);
            r.orbit3(0.414521336801277, 0.047072502504194);
            r.orbit3(0.229399572042831, 0.047363586536355);
            r.orbit3(0.114424495196330, 0.031167529045794);
            r.orbit3(0.024811391363459, 0.007975771465074);
            r.orbit6(0.094853828379579, 0.268794997058761, 0.036848402728732);
            r.orbit6(0.018100773278807, 0.291730066734288, 0.017401463303822);
            r.orbit6(0.022233076674090, 0.126357385491669, 0.015521786839045);
            break;
        case 14:
            r.orbit3(0.488963910362179, 0.021883581369429);
            r.orbit3(0.417644719340454, 0.032788353544125);
            r.orbit3(0.273477528308839, 0.051774104507292);
            r.orbit3(0.177205532412543, 0.042162588736993);
            r.orbit3(0.061799883090873, 0.014433699669777);
            r.orbit3(0.019390961248701, 0.004923403602400);
            r.orbit6(0.057124757403648, 0.172266687821356, 0.024665753212564);
            r.orbit6(0.092916249356972, 0.336861459796345, 0.038571510787061);
            r.orbit6(0.014646950055654, 0.298372882136258, 0.014436308113534);
            r.orbit6(0.001268330932872, 0.118974497696957, 0.005010228838501);
            break;
        case 17:
            r.centroid(0.033437199290803);
            r.orbit3(0.497170540556774, 0.005093415440507);
            r.orbit3(0.482176322624625, 0.014670864527638);
            r.orbit3(0.450239969020782, 0.024350878353672);
            r.orbit3(0.400266239377397, 0.031107550868969);
            r.orbit3(0.252141267970953, 0.031257111218620);
            r.orbit3(0.162047004658461, 0.024815654339665);
            r.orbit3(0.075875882260746, 0.014056073070557);
            r.orbit3(0.015654726967822, 0.003194676173779);
            r.orbit6(0.010186928826919, 0.334319867363658, 0.008119655318993);
            r.orbit6(0.135440871671036, 0.292221537796944, 0.026805742283163);
            r.orbit6(0.054423924290583, 0.319574885423190, 0.018459993210822);
            r.orbit6(0.012868560833637, 0.190704224192292, 0.008476868534328);
            r.orbit6(0.067165782413524, 0.180483211648746, 0.018292796770025);
            r.orbit6(0.014663182224828, 0.080711313679564, 0.006665632004165);
            break;
        case 19:
            r.centroid(0.032906331388919);
            r.orbit3(0.489609987073006, 0.010330731891272);
            r.orbit3(0.454536892697893, 0.022387247263016);
            r.orbit3(0.401416680649431, 0.030266125869468);
            r.orbit3(0.255551654403098, 0.030490967802198);
            r.orbit3(0.177077942152130, 0.024159212741641);
            r.orbit3(0.110061053227952, 0.016050803586801);
            r.orbit3(0.055528624251840, 0.008084580261784);
            r.orbit3(0.012621863777229, 0.002079362027485);
            r.orbit6(0.003611417848412, 0.395754787356943, 0.003884876904981);
            r.orbit6(0.134466754530780, 0.307929983880436, 0.025574160612022);
            r.orbit6(0.014446025776115, 0.264566948406520, 0.008880903573338);
            r.orbit6(0.046933578838178, 0.358539352205951, 0.016124546761731);
            r.orbit6(0.002861120350567, 0.157807405968595, 0.002491941817491);
            r.orbit6(0.223861424097916, 0.075050596975911, 0.018242840118951);
            r.orbit6(0.034647074816760, 0.142421601113383, 0.010258563736199);
            r.orbit6(0.010161119296278, 0.065494628082938, 0.003799928855302);
            break;
        default:
            return {};
    }
    return r.finish(degree);
}

} // namespace

void
gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights)
{
    if (n < 1)
        throw std::invalid_argument("gauss_legendre: need at least one point");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1)
                p0 = 1.0, p1 = x;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        // recompute the derivative at the converged node for the weight
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
        nodes[n / 2] = 0.0;
}

QuadRule
edge_rule(int degree)
{
    if (degree < 1 || degree > 25)
        throw unsupported_error("edge_rule: degree " + std::to_string(degree) + " outside [1, 25]");
    const int n = (degree + 2) / 2;
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    QuadRule rule;
    rule.exact_degree = 2 * n - 1;
    for (int i = 0; i < n; ++i) {
        rule.points.push_back({ 0.5 * (x[i] + 1.0), 0.0 });
        rule.weights.push_back(0.5 * w[i]);
    }
    return rule;
}

QuadRule
conical_product_rule(int degree)
{
    if (degree < 1)
        throw std::invalid_argument("conical_product_rule: degree must be positive");
    // the collapsed direction carries the (1 - u) Jacobian, one degree more
    const int nu = (degree + 3) / 2;
    const int nv = (degree + 2) / 2;
    std::vector<double> xu, wu, xv, wv;
    gauss_legendre(nu, xu, wu);
    gauss_legendre(nv, xv, wv);
    QuadRule rule;
    rule.exact_degree = std::min(2 * nu - 2, 2 * nv - 1);
    for (int i = 0; i < nu; ++i) {
        const double u = 0.5 * (xu[i] + 1.0);
        for (int j = 0; j < nv; ++j) {
            const double v = 0.5 * (xv[j] + 1.0);
            rule.points.push_back({ u, (1.0 - u) * v });
            rule.weights.push_back(0.25 * wu[i] * wv[j] * (1.0 - u));
        }
    }
    return rule;
}

QuadRule
triangle_rule(int degree)
{
    if (degree < 1)
        throw std::invalid_argument("triangle_rule: degree must be at least 1");
    if (degree > 20)
        throw unsupported_error("triangle_rule: degree " + std::to_string(degree) + " > 20 not supported");

    QuadRule best;
    for (int d = degree; d <= 20; ++d) {
        QuadRule candidate = dunavant(d);
        if (candidate.size() > 0) {
            best = std::move(candidate);
            break;
        }
    }
    QuadRule product = conical_product_rule(degree);
    if (best.size() == 0 || product.size() < best.size())
        return product;
    return best;
}

} // namespace hermite
