# sections/infoplane.py
import streamlit as st
import pandas as pd
import matplotlib.pyplot as plt


def render(plane, summary):
    st.header("📈 Information Plane")

    if plane is None or plane.empty:
        st.info("No information-plane points yet. Run `splitib analyze` first.")
        return

    phases = sorted(plane["phase"].dropna().unique().tolist())
    col1, col2 = st.columns([1, 2])
    with col1:
        chosen = st.multiselect("Phases", phases, default=phases)
    with col2:
        layers = sorted(plane["layer"].dropna().unique().tolist())
        chosen_layers = st.multiselect("Layers", layers, default=layers)

    df = plane[plane["phase"].isin(chosen) & plane["layer"].isin(chosen_layers)]
    if df.empty:
        st.info("Nothing selected.")
        return

    fig, ax = plt.subplots(figsize=(8, 6))
    for (phase, layer), grp in df.groupby(["phase", "layer"]):
        grp = grp.sort_values("epoch")
        ax.plot(grp["i_xh_bits"], grp["i_yh_bits"], "-", alpha=0.4)
        sc = ax.scatter(grp["i_xh_bits"], grp["i_yh_bits"], c=grp["epoch"], cmap="viridis",
                        label=f"phase {phase} · layer {layer}")
    fig.colorbar(sc, ax=ax, label="Epoch")
    ax.set_xlabel("I(X;H) [bits]")
    ax.set_ylabel("I(H;Y) [bits]")
    ax.legend()
    st.pyplot(fig)

    if summary and "plane" in summary:
        s = summary["plane"]
        final = pd.DataFrame(
            {"layer": list(s["final_i_xh_by_layer"]),
             "final I(X;H) bits": list(s["final_i_xh_by_layer"].values()),
             "I(H;Y) gain bits": [s["i_yh_gain_by_layer"].get(k) for k in s["final_i_xh_by_layer"]]}
        )
        st.dataframe(final, use_container_width=True)
        if s["i_xh_decreases_with_depth"]:
            st.success("I(X;H) decreases with depth at the final epoch.")
        else:
            st.warning("I(X;H) does not decrease monotonically with depth at the final epoch.")
