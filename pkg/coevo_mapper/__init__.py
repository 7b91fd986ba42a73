# Co-evolution mapper - bursts, co-author networks, science maps and convergence
# of publication and funding records
