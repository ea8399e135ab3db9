import init, { simulate, assess_encounter, psm_encode, psm_decode } from "./pkg/p2v_web.js";

const $ = (id) => document.getElementById(id);

function show(el, text, isError = false) {
  el.textContent = text;
  el.classList.toggle("error", isError);
}

function formNumbers(form) {
  const out = {};
  for (const [k, v] of new FormData(form)) out[k] = Number(v);
  return out;
}

function runSimulation(event) {
  event?.preventDefault();
  try {
    const result = JSON.parse(simulate(JSON.stringify(formNumbers($("sim-form")))));
    $("plot").innerHTML = result.svg;
    show($("sim-summary"), result.summary);
    $("sim-sequence").innerHTML = "Warnings: " + result.sequence
      .map((l) => `<span class="level ${l}">${l}</span>`)
      .join(" &rarr; ");
  } catch (e) {
    $("plot").innerHTML = "";
    $("sim-sequence").textContent = "";
    show($("sim-summary"), String(e), true);
  }
}

function runAssess(event) {
  event.preventDefault();
  const f = formNumbers($("assess-form"));
  try {
    const r = JSON.parse(assess_encounter(f.d_v, f.v_v, f.d_p, f.v_p, f.t_s));
    const fmt = (x, unit) => (x === null ? "never" : `${x.toFixed(2)} ${unit}`);
    show($("assess-out"), [
      `vehicle reaches zone in     ${fmt(r.ttz_vehicle_s, "s")}`,
      `pedestrian reaches zone in  ${fmt(r.ttz_pedestrian_s, "s")}`,
      `collision predicted         ${r.collision_predicted}`,
      `deceleration needed to stop ${fmt(r.a_min_mps2, "m/s^2")}`,
      `warning                     ${r.level}`,
    ].join("\n"));
  } catch (e) {
    show($("assess-out"), String(e), true);
  }
}

function runEncode(event) {
  event.preventDefault();
  try {
    const hex = psm_encode(new FormData($("encode-form")).get("fields"));
    $("decode-form").elements.hex.value = hex;
    show($("codec-out"), hex);
  } catch (e) {
    show($("codec-out"), String(e), true);
  }
}

function runDecode(event) {
  event.preventDefault();
  try {
    show($("codec-out"), psm_decode(new FormData($("decode-form")).get("hex")));
  } catch (e) {
    show($("codec-out"), String(e), true);
  }
}

await init();
$("sim-form").addEventListener("submit", runSimulation);
$("assess-form").addEventListener("submit", runAssess);
$("encode-form").addEventListener("submit", runEncode);
$("decode-form").addEventListener("submit", runDecode);
runSimulation();
