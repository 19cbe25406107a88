#include <csetjmp>
#include <string>
#include <vector>

#include <jpeglib.h>

#include "hmax/error.hpp"
#include "hmax/imgproc.hpp"

namespace hmax {
namespace {

struct ErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void on_error(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<ErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, mgr->message);
  std::longjmp(mgr->jump, 1);
}

void on_message(j_common_ptr) {}

}  // namespace

GrayImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  ErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = on_error;
  err.base.output_message = on_message;

  // Nothing with a destructor may live between setjmp and the last libjpeg call.
  std::vector<double> pixels;
  std::vector<JSAMPLE> row;
  int height = 0;
  int width = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorKind::format, std::string("jpeg: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  const bool gray = cinfo.jpeg_color_space == JCS_GRAYSCALE;
  cinfo.out_color_space = gray ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  height = static_cast<int>(cinfo.output_height);
  width = static_cast<int>(cinfo.output_width);
  const int channels = cinfo.output_components;
  pixels.resize(static_cast<std::size_t>(height) * static_cast<std::size_t>(width));
  row.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(channels));
  while (cinfo.output_scanline < cinfo.output_height) {
    const auto r = static_cast<std::size_t>(cinfo.output_scanline);
    JSAMPROW rows[1] = {row.data()};
    jpeg_read_scanlines(&cinfo, rows, 1);
    for (std::size_t c = 0; c < static_cast<std::size_t>(width); ++c) {
      pixels[r * static_cast<std::size_t>(width) + c] =
          channels == 1 ? row[c] / 255.0 : luminance(row[3 * c], row[3 * c + 1], row[3 * c + 2]);
    }
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);

  return GrayImage(Matrix(height, width, std::move(pixels)));
}

}  // namespace hmax
