# snnbench results ledger
