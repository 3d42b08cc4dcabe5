import init, { rd_explorer, lambda_search, denoise_sweep } from "./pkg/clipforge_web.js";

const $ = (id) => document.getElementById(id);

function curve(alpha, beta, rates) {
  const rows = rates.map((r) => `${r},${(alpha + beta * Math.log(r)).toFixed(3)},PSNR`);
  return ["rate_kbps,quality,metric", ...rows].join("\n");
}

function run(numEl, svgEl, fn, show) {
  const t0 = performance.now();
  try {
    const r = JSON.parse(fn());
    svgEl.innerHTML = r.svg;
    numEl.className = "num";
    numEl.textContent = `${show(r)}  (${(performance.now() - t0).toFixed(0)} ms)`;
  } catch (e) {
    numEl.className = "num err";
    numEl.textContent = String(e.message ?? e);
  }
}

await init();

$("rd-ref").value = curve(2, 5, [150, 300, 600, 1200, 2400]);
$("rd-test").value = curve(2.8, 5, [140, 290, 580, 1150, 2300]);

$("rd-go").onclick = () =>
  run($("rd-num"), $("rd-svg"), () => rd_explorer($("rd-test").value, $("rd-ref").value),
    (r) => `BD-rate ${r.bd_rate.toFixed(4)}%`);

$("ls-go").onclick = () =>
  run($("ls-num"), $("ls-svg"),
    () => lambda_search(+$("ls-w").value, +$("ls-h").value, +$("ls-k").value, +$("ls-g").value, $("ls-p").value),
    (r) => {
      let s = `k = ${r.k_opt.toFixed(4)}, gain ${r.bd_rate_gain.toFixed(3)}%, ${r.encodes} encodes, ${r.wall_time.toFixed(2)} s modeled`;
      if (r.proxy) s += `; proxy ${r.proxy.proxy_width}x${r.proxy.proxy_height} ${r.proxy.proxy_preset}`;
      return s;
    });

$("ds-go").onclick = () =>
  run($("ds-num"), $("ds-svg"),
    () => denoise_sweep(+$("ds-l").value, +$("ds-r").value, BigInt($("ds-s").value)),
    (r) => `best strength ${r.best_strength.toFixed(2)} at ${r.best_psnr.toFixed(2)} dB`);

$("rd-go").click();
$("ls-go").click();
