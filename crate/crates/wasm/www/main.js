import init, { distribution, magic, fidelity } from "./pkg/stabcert_wasm.js";

const presets = {
  bell: { n: 2, gates: [{ g: "H", q: [0] }, { g: "CX", q: [0, 1] }] },
  t: { n: 1, gates: [{ g: "H", q: [0] }, { g: "T", q: [0] }] },
  "ghz-t": {
    n: 3,
    gates: [
      { g: "H", q: [0] }, { g: "CX", q: [0, 1] }, { g: "CX", q: [1, 2] },
      { g: "T", q: [0] }, { g: "H", q: [1] }, { g: "T", q: [1] }, { g: "H", q: [1] },
    ],
  },
};

const $ = (id) => document.getElementById(id);
const fmt = (x, digits = 6) => (x === null || x === undefined ? "-" : Number(x).toFixed(digits));

function loadPreset() {
  $("circuit").value = JSON.stringify(presets[$("preset").value], null, 1);
}

function table(head, rows) {
  const th = head.map((h) => `<th>${h}</th>`).join("");
  const body = rows.map((r) => `<tr>${r.map((c) => `<td>${c}</td>`).join("")}</tr>`).join("");
  return `<table><tr>${th}</tr>${body}</table>`;
}

function guarded(target, f) {
  try {
    $(target).innerHTML = f();
  } catch (e) {
    $(target).innerHTML = `<p class="error">${e.message ?? e}</p>`;
  }
}

function showDistribution() {
  guarded("dist", () => {
    const d = JSON.parse(distribution($("circuit").value));
    const rows = d.outcomes.map(([bits, p, cost]) => [
      bits,
      fmt(p),
      `<div class="bar" style="width:${(p * 12).toFixed(2)}rem"></div>`,
      cost,
    ]);
    return `<p>n = ${d.n}, T-count = ${d.t_count}</p>` + table(["x", "p(x)", "", "n_cl"], rows);
  });
}

function showMagic() {
  guarded("magic", () => {
    const alphas = Float64Array.from($("alphas").value.split(",").map(Number));
    const m = JSON.parse(magic($("circuit").value, alphas));
    const rows = m.rows.map((r) => [r.alpha, fmt(r.value), r.support]);
    return table(["&alpha;", "M<sub>&alpha;</sub> (bits)", "support"], rows) + `<p>nullity ${m.nullity}</p>`;
  });
}

function showFidelity() {
  guarded("dfe", () => {
    const f = JSON.parse(
      fidelity($("circuit").value, $("noise").value, Number($("epsilon").value), Number($("delta").value), Number($("seed").value)),
    );
    return table(
      ["estimate", "exact", "samples", "lower bound", "upper bound"],
      [[fmt(f.estimate), fmt(f.truth), f.samples, fmt(f.lower, 1), fmt(f.upper, 1)]],
    );
  });
}

await init();
$("preset").addEventListener("change", loadPreset);
$("run-dist").addEventListener("click", showDistribution);
$("run-magic").addEventListener("click", showMagic);
$("run-dfe").addEventListener("click", showFidelity);
loadPreset();
