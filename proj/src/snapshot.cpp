#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "sjko/error.hpp"
#include "sjko/measures.hpp"

namespace sjko {

void write_snapshot(std::ostream& os, const GridMeasure& rho, double t) {
    const Domain& d = rho.domain();
    os << std::setprecision(17);
    if (d.dim == 1)
        os << 1 << ' ' << d.nx() << ' ' << d.lo[0] << ' ' << d.hi[0] << ' ' << t << '\n';
    else
        os << 2 << ' ' << d.nx() << ' ' << d.ny() << ' ' << d.lo[0] << ' ' << d.hi[0] << ' '
           << d.lo[1] << ' ' << d.hi[1] << ' ' << t << '\n';
    for (double v : rho.values()) os << v << '\n';
    if (!os) fail(ErrorKind::io, "failed writing snapshot");
}

void write_snapshot(const std::string& path, const GridMeasure& rho, double t) {
    std::ofstream f(path);
    if (!f) fail(ErrorKind::io, "cannot open " + path + " for writing");
    write_snapshot(f, rho, t);
}

Snapshot read_snapshot(std::istream& is, Boundary bc) {
    int dim = 0;
    if (!(is >> dim) || (dim != 1 && dim != 2)) fail(ErrorKind::io, "snapshot: bad dimension");
    Domain d;
    double t = 0.0;
    if (dim == 1) {
        int nx;
        double a, b;
        if (!(is >> nx >> a >> b >> t)) fail(ErrorKind::io, "snapshot: bad 1D header");
        d = Domain::line(a, b, nx, bc);
    } else {
        int nx, ny;
        double x0, x1, y0, y1;
        if (!(is >> nx >> ny >> x0 >> x1 >> y0 >> y1 >> t))
            fail(ErrorKind::io, "snapshot: bad 2D header");
        d = Domain::box(x0, x1, nx, y0, y1, ny, bc);
    }
    std::vector<double> v(d.size());
    for (double& x : v)
        if (!(is >> x)) fail(ErrorKind::io, "snapshot: truncated data");
    return {GridMeasure::from_density(d, std::move(v)), t};
}

Snapshot read_snapshot(const std::string& path, Boundary bc) {
    std::ifstream f(path);
    if (!f) fail(ErrorKind::io, "cannot open " + path);
    return read_snapshot(f, bc);
}

}  // namespace sjko
