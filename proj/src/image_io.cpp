#include "gazekit/image_io.hpp"

#include "gazekit/error.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cstring>

namespace gazekit {

ImageRaster read_image(const std::string& path) {
    cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (m.empty()) throw Error(ErrorCode::IoError, "cannot decode image " + path);
    if (m.depth() != CV_8U) m.convertTo(m, CV_8U, m.depth() == CV_16U ? 1.0 / 257.0 : 1.0);
    if (m.channels() == 4) cv::cvtColor(m, m, cv::COLOR_BGRA2BGR);
    if (m.channels() != 1 && m.channels() != 3)
        throw Error(ErrorCode::IoError, path + ": unsupported channel count " + std::to_string(m.channels()));
    if (m.channels() == 3) cv::cvtColor(m, m, cv::COLOR_BGR2RGB);

    ImageRaster out(m.cols, m.rows, m.channels());
    const std::size_t row_bytes = static_cast<std::size_t>(m.cols) * m.channels();
    for (int r = 0; r < m.rows; ++r) std::memcpy(out.samples.data() + r * row_bytes, m.ptr<std::uint8_t>(r), row_bytes);
    return out;
}

void write_png(const std::string& path, const ImageRaster& image) {
    if (image.channels != 1 && image.channels != 3)
        throw Error(ErrorCode::IoError, "PNG output supports 1 or 3 channels");
    cv::Mat m(image.height, image.width, image.channels == 1 ? CV_8UC1 : CV_8UC3,
              const_cast<std::uint8_t*>(image.samples.data()));
    cv::Mat bgr;
    if (image.channels == 3)
        cv::cvtColor(m, bgr, cv::COLOR_RGB2BGR);
    else
        bgr = m;
    if (!cv::imwrite(path, bgr)) throw Error(ErrorCode::IoError, "cannot write " + path);
}

} // namespace gazekit
